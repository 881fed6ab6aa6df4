"""Deterministic simulator of a wrist-controlled, tendon-driven grasping
orthosis: throttle/binary/proportional wrist-angle control over a calibrated
plant, a virtual participant, and the experiment harnesses that exercise
them."""

__version__ = "0.1.0"
