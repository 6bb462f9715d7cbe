from . import messages
from .messages import MergeProbe, Message, NodeRef, ProbeState
from .node import ABORTED, DELETED, DUPLICATE, FOUND, INSERTED, NOT_FOUND, Node

__all__ = [
    "ABORTED",
    "DELETED",
    "DUPLICATE",
    "FOUND",
    "INSERTED",
    "NOT_FOUND",
    "MergeProbe",
    "Message",
    "Node",
    "NodeRef",
    "ProbeState",
    "messages",
]
