"""Flat dotted-key run configuration.

Grammar (one scenario per file):

    # full-line comments start with '#'; blank lines are ignored
    key.subkey = value
    variant.<name>.key.subkey = value

Values are plain strings; consumers convert them. Lists are
comma-separated (``1,2,3``), matrices use ';' between rows
(``1,0;0,1``), edge lists use ``u-v`` pairs (``0-1,1-2``). Booleans are
``true``/``false``; thresholds accept ``off`` for a disabled mechanism.

``variant.<name>.*`` lines override the base keys for that named run;
the base scenario itself always runs under the name ``base``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config_text", "load_config", "run_id"]

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse the flat key=value grammar into an ordered dict of strings."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path) -> "RunConfig":
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return RunConfig(parse_config_text(text))


@dataclass
class RunConfig:
    """Typed view over the flat key/value scenario description."""

    raw: dict[str, str] = field(default_factory=dict)

    # -- typed getters ------------------------------------------------

    def get(self, key: str, default=None) -> str | None:
        return self.raw.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.raw:
            raise ConfigError(f"missing required key {key!r}")
        return self.raw[key]

    def get_int(self, key: str, default: int | None = None) -> int | None:
        val = self.raw.get(key)
        if val is None:
            return default
        try:
            return int(float(val)) if float(val) == int(float(val)) else int(val)
        except ValueError:
            raise ConfigError(f"{key}: expected integer, got {val!r}") from None

    def get_float(self, key: str, default: float | None = None) -> float | None:
        val = self.raw.get(key)
        if val is None:
            return default
        try:
            return float(val)
        except ValueError:
            raise ConfigError(f"{key}: expected number, got {val!r}") from None

    def get_bool(self, key: str, default: bool = False) -> bool:
        val = self.raw.get(key)
        if val is None:
            return default
        low = val.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{key}: expected true/false, got {val!r}")

    def get_float_or_off(self, key: str) -> float | None:
        """A numeric threshold, or None when absent or set to 'off'."""
        val = self.raw.get(key)
        if val is None or val.lower() == "off":
            return None
        try:
            return float(val)
        except ValueError:
            raise ConfigError(f"{key}: expected number or 'off', got {val!r}") from None

    def get_floats(self, key: str, default=None):
        val = self.raw.get(key)
        if val is None:
            return default
        try:
            return [float(x) for x in val.split(",") if x.strip() != ""]
        except ValueError:
            raise ConfigError(f"{key}: expected comma-separated numbers, got {val!r}") from None

    def get_ints(self, key: str, default=None):
        floats = self.get_floats(key, None)
        if floats is None:
            return default
        out = []
        for x in floats:
            if x != int(x):
                raise ConfigError(f"{key}: expected integers, got {x}")
            out.append(int(x))
        return out

    def get_matrix(self, key: str, default=None):
        val = self.raw.get(key)
        if val is None:
            return default
        try:
            return [[float(x) for x in row.split(",")] for row in val.split(";")]
        except ValueError:
            raise ConfigError(f"{key}: expected ';'-separated rows of numbers") from None

    def get_edges(self, key: str, default=None):
        val = self.raw.get(key)
        if val is None:
            return default
        edges = []
        for part in val.split(","):
            part = part.strip()
            if not part:
                continue
            bits = part.split("-")
            if len(bits) != 2:
                raise ConfigError(f"{key}: expected 'u-v' pairs, got {part!r}")
            try:
                edges.append((int(bits[0]), int(bits[1])))
            except ValueError:
                raise ConfigError(f"{key}: non-integer node id in {part!r}") from None
        return edges

    # -- variants -----------------------------------------------------

    def variant_names(self) -> list[str]:
        names: list[str] = []
        for key in self.raw:
            if key.startswith("variant."):
                bits = key.split(".")
                if len(bits) < 3:
                    raise ConfigError(f"malformed variant key {key!r}")
                if bits[1] not in names:
                    names.append(bits[1])
        return names

    def expand_variants(self) -> list[tuple[str, "RunConfig"]]:
        """The base scenario plus one override-merged config per variant."""
        base = {k: v for k, v in self.raw.items() if not k.startswith("variant.")}
        out = [(self.get("preset.base_label", "base"), RunConfig(dict(base)))]
        for name in self.variant_names():
            prefix = f"variant.{name}."
            merged = dict(base)
            for key, val in self.raw.items():
                if key.startswith(prefix):
                    merged[key[len(prefix):]] = val
            out.append((name, RunConfig(merged)))
        return out

    # -- canonical form ------------------------------------------------

    def canonical_text(self) -> str:
        return "".join(f"{k} = {self.raw[k]}\n" for k in sorted(self.raw))


def run_id(cfg: RunConfig, seed: int) -> str:
    """Short content hash identifying a (config, seed) pair."""
    digest = hashlib.sha1()
    digest.update(cfg.canonical_text().encode())
    digest.update(str(seed).encode())
    return digest.hexdigest()[:12]
