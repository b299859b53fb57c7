"""Classical and generalized Gibbs states: closed forms, oracles and flows."""

__version__ = "0.1.0"
