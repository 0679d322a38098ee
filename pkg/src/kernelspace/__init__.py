"""A runtime for a small concurrent constraint language.

The package implements a shared constraint store over rational trees,
dataflow threads scheduled round-robin, by-need laziness, cells and ports,
first-class computation spaces with clone/commit/merge, a finite-domain
constraint system, and search engines built from spaces.  The `kernelspace`
command line runs programs, a REPL, and a bundled example corpus.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
