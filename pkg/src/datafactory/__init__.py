"""Collaborative multi-agent table question answering.

Tables ingest into a relational store and an auto-constructed knowledge
graph; SQL and graph-query agent teams answer questions over them under
a ReAct leader, with benchmark and gateway layers on top.
"""

__version__ = "0.1.0"
