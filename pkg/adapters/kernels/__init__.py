"""
Kernel Adapters
Step, inverse-distance and covariant spacelike kernels plus their factory.
"""

from .factory import KernelFactory

__all__ = ["KernelFactory"]
