"""certforge: finite-field progression certificates for covers of tori and
elliptic curves, with an independent verifier and the `forge` CLI."""

__version__ = "0.1.0"
