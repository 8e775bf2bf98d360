"""Blind recovery of a low-pass convolution filter and an initial state from
uniformly subsampled snapshots of the evolving state."""

__version__ = "0.1.0"
