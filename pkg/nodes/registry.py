"""
Node registry for AGLAB.
Imports every node module and merges their mappings; a module that fails to import is logged and skipped.
"""

import importlib
import logging

logger = logging.getLogger(__name__)

# Core nodes
core_node_files = [
    "nodes.core.constructors",
]

# Measure nodes
measure_node_files = [
    "nodes.measure.gluing_nodes",
]

# Analysis nodes
analysis_node_files = [
    "nodes.analysis.analysis_nodes",
]

# Structure nodes
structure_node_files = [
    "nodes.structure.structure_nodes",
]

# Compression nodes
compression_node_files = [
    "nodes.compression.compression_nodes",
]

# Search nodes
search_node_files = [
    "nodes.search.search_nodes",
]

NODE_MODULES = (core_node_files + measure_node_files + analysis_node_files + structure_node_files
                + compression_node_files + search_node_files)


def load_nodes(modules=None):
    """
    Import node modules and merge their mappings.

    Returns:
        tuple: (NODE_CLASS_MAPPINGS, NODE_DISPLAY_NAME_MAPPINGS)
    """
    classes, names = {}, {}
    for node_module in modules or NODE_MODULES:
        try:
            module = importlib.import_module(node_module)
        except Exception:
            logger.exception("Failed to load %s", node_module)
            continue
        classes.update(getattr(module, "NODE_CLASS_MAPPINGS", {}))
        names.update(getattr(module, "NODE_DISPLAY_NAME_MAPPINGS", {}))
        logger.debug("Loaded %s", node_module)
    logger.info("Total nodes loaded: %d", len(classes))
    return classes, names


def commands(classes=None):
    """COMMAND string ("search", "check kk", ...) -> node class."""
    if classes is None:
        classes, _ = load_nodes()
    table = {}
    for node_class in classes.values():
        command = getattr(node_class, "COMMAND", None)
        if command is None:
            continue
        if command in table:
            raise ValueError(f"two nodes claim the command {command!r}")
        table[command] = node_class
    return table
