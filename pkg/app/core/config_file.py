"""
Reader and writer for the flat ``section.key = value`` config format.

    # comment
    seed = 7
    scheduler.policy = max-cache-hit
    node.cache_bits = 2GB

Keys without a dot are top-level settings. The literal ``none`` maps to None.
"""

from pathlib import Path
from typing import Any

from app.core.exceptions import ConfigError


def parse_lines(lines: list[str], source: str = "<string>") -> dict[str, Any]:
    """
    Parse config lines into a nested dict.

    Args:
        lines: Raw lines of the config text
        source: Name used in error messages (usually the file path)

    Returns:
        Nested dict ``{section: {key: value}}`` plus top-level keys

    Raises:
        ConfigError: On a malformed line or a key given twice
    """
    result: dict[str, Any] = {}
    seen: set[str] = set()

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")

        key, value = (part.strip() for part in line.split("=", 1))
        if not key or any(not part for part in key.split(".")):
            raise ConfigError(f"{source}:{lineno}: malformed key in {raw.strip()!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)

        parsed: Any = None if value.lower() == "none" else value
        parts = key.split(".")
        node = result
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"{source}:{lineno}: {part!r} is both a value and a section")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(f"{source}:{lineno}: {key!r} is a section, not a value")
        node[parts[-1]] = parsed

    return result


def read_config_file(path: Path) -> dict[str, Any]:
    """Read and parse a config file, naming the path on failure."""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return parse_lines(text.splitlines(), source=str(path))


def flatten(data: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    """Flatten a nested dict into dotted keys, sections in insertion order."""
    flat: dict[str, Any] = {}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, prefix=f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render(data: dict[str, Any]) -> str:
    """Render a nested dict back into config-file text."""
    flat = flatten(data)
    top = [key for key in flat if "." not in key]
    nested = [key for key in flat if "." in key]
    return "".join(f"{key} = {format_value(flat[key])}\n" for key in top + nested)
