"""lobe: a headless live-object programming kernel.

Programs in a small Smalltalk-flavored object language run inside one live
world. Executions pause into manipulable debug sessions instead of crashing,
methods can be written while paused and the run resumed, every compilation
action is journaled and revertible, and objects expose structured inspection
views. A line protocol makes the whole kernel scriptable.
"""

from .kernel import DebugSession, Kernel, KernelError

__version__ = "0.1.0"

__all__ = ["Kernel", "KernelError", "DebugSession", "__version__"]
