"""Includes functionality for loading config files."""

import os
import json
import functools


CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "config")


@functools.lru_cache(maxsize=None)
def _read_config(path: str):
    with open(path) as f:
        return json.load(f)


def load_config():
    """Returns a dictionary loaded from the config.json file."""
    # Copy so that callers cannot mutate the cached defaults
    return json.loads(
        json.dumps(_read_config(os.path.join(CONFIG_DIR, "config.json")))
    )


def load_section(name: str):
    """Returns a single top-level section of the config.json file."""
    config = load_config()
    assert name in config, f"Unknown config section {name}"

    return config[name]
