"""Multi-scale positional encoding toolkit.

Explicit sinusoidal embedding grids with a shift/resize/tile/extend algebra,
a small numpy autograd engine, toy synthesis and diffusion models driven by
the embeddings, and probes quantifying spatial bias.
"""

__version__ = "0.1.0"
