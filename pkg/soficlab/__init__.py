"""Sofic entropy estimates, subshifts of finite type and cellular automata over lattices and free groups."""

__version__ = "0.1.0"
