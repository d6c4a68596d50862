"""Fixture loading."""

import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

FIXTURE_FILES = ("polytopes.json", "fibrations.json", "lattices.json",
                 "operators.json", "pfaffians.json")


class FixtureError(Exception):
    pass


def fixture_dir():
    override = os.environ.get("K3LAB_FIXTURES")
    if override:
        return Path(override)
    return Path(str(resources.files("k3lab") / "fixtures"))


@lru_cache(maxsize=None)
def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise FixtureError(f"missing fixture {path}") from exc
    except json.JSONDecodeError as exc:
        raise FixtureError(f"corrupt fixture {path}: {exc}") from exc


def load(name: str):
    """Parsed JSON of one fixture file; callers must not mutate the result."""
    return _load(str(fixture_dir() / name))
