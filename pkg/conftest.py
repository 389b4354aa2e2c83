import os
import sys

# Tests import the engine, nodes and utils packages from the repository root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
