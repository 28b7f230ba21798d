"""swarmdeck: a desk-scale, hardware-free multimodal human-swarm interaction sandbox.

The package wires a topic pub/sub hub, a simulated multitouch tracking field
speaking TUIO over OSC, kinematically simulated omniwheel robots, three
intent decoders (SSVEP via canonical correlation, EMG gestures via a small
MLP, gaze dwell/trajectory), and swarm behaviors into one deterministic,
replayable process. See README.md for the topic table and CLI usage.
"""

__version__ = "0.1.0"
