"""JSON wire format for protocol messages.

Every integer inside a payload is written as a decimal string so that
arbitrary-precision values survive any JSON reader.
"""

import json
from dataclasses import dataclass, field
from typing import Any, List


def _encode(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    return obj


def _decode(obj):
    if isinstance(obj, str):
        try:
            return int(obj)
        except ValueError:
            return obj
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


@dataclass
class Message:
    step: int
    sender: str
    receiver: str
    name: str
    payload: Any

    def to_dict(self):
        return {
            "step": self.step,
            "sender": self.sender,
            "receiver": self.receiver,
            "name": self.name,
            "payload": _encode(self.payload),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["step"], d["sender"], d["receiver"], d["name"], _decode(d["payload"]))


@dataclass
class Transcript:
    messages: List[Message] = field(default_factory=list)

    def send(self, step, sender, receiver, name, payload):
        self.messages.append(Message(step, sender, receiver, name, payload))

    def find(self, name, sender=None, receiver=None):
        return [
            m
            for m in self.messages
            if m.name == name
            and (sender is None or m.sender == sender)
            and (receiver is None or m.receiver == receiver)
        ]

    def first(self, name, sender=None, receiver=None):
        found = self.find(name, sender, receiver)
        if not found:
            raise KeyError(f"no {name!r} message in transcript")
        return found[0]

    def to_dict(self):
        return {"messages": [m.to_dict() for m in self.messages]}

    @classmethod
    def from_dict(cls, d):
        return cls([Message.from_dict(m) for m in d["messages"]])

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
