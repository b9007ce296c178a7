"""swarmcov: decentralized ergodic coverage for simulated robot swarms."""

__version__ = "0.1.0"
