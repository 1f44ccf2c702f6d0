"""Workbench for the semantically linear lambda-calculus."""
import sys

# terms produced by fixpoint unfolding get deep; every traversal is recursive
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

__version__ = "0.1.0"
