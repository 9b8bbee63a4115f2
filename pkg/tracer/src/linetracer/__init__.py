"""Line-level script tracer emitting variable-change events on stderr."""

from .tracer import main, trace_program

__all__ = ["main", "trace_program"]
