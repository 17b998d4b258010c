"""Experiment configuration files (YAML).

See ``README.md`` for the schema; ``data/two_monopoles.yaml`` is the shipped
reproduction of the free-field two-monopole experiment.
"""
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from sfmkl.mkl import L1Options, L2Options
from sfmkl.ridge import DEFAULT_LAMBDA
from sfmkl.scene import POINT_SETS, PointSource, Scene, SceneError, Sphere, layered_layout

METHODS = ("uniform", "l1", "l2")
SHIPPED = {"two_monopoles": "two_monopoles.yaml"}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass(frozen=True)
class MicLayer:
    count: int
    radius: float
    point_set: str = "t-design"


@dataclass(frozen=True)
class BankConfig:
    d_eta: int = 10
    d_beta: int = 10
    beta_start: float = 0.0
    beta_step: float = 1.0
    zeniths_deg: tuple = (90.0,)

    @property
    def zeniths(self):
        return tuple(np.deg2rad(z) for z in self.zeniths_deg)


@dataclass(frozen=True)
class ExperimentConfig:
    scene: Scene
    layers: tuple
    bank: BankConfig = BankConfig()
    lam: float = DEFAULT_LAMBDA
    methods: tuple = METHODS
    frequencies: tuple = tuple(float(f) for f in range(100, 1001, 100))
    snr_db: Optional[float] = None
    seeds: tuple = (0,)
    grid_spacing: float = 0.05
    slices: tuple = ()
    l1: L1Options = L1Options()
    l2: L2Options = L2Options()
    output_dir: str = "results"
    output_format: str = "csv"
    name: str = "experiment"
    source_path: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.frequencies:
            raise ConfigError("frequencies: the sweep is empty")
        if not self.methods:
            raise ConfigError("methods: at least one method is required")
        if not self.seeds:
            raise ConfigError("observation.seeds: at least one seed is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"methods: unknown method {m!r}; expected one of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods: duplicate entries")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ConfigError("lambda: must be positive")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output.format: must be 'csv' or 'json'")

    def mic_array(self):
        return layered_layout([(l.count, l.radius, l.point_set) for l in self.layers])

    def with_overrides(self, **kwargs):
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


_TOP_KEYS = {"name", "scene", "microphones", "observation", "bank", "lambda", "methods",
             "frequencies", "evaluation", "l1", "l2", "output"}


class _Section:
    """Mapping view that records the key path for error messages."""

    def __init__(self, data, path, allowed):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path or '<root>'}: expected a mapping")
        unknown = set(data) - set(allowed)
        if unknown:
            where = f"{path}." if path else ""
            raise ConfigError(f"{where}{sorted(unknown)[0]}: unknown key")
        self.data = data
        self.path = path

    def key(self, name):
        return f"{self.path}.{name}" if self.path else name

    def get(self, name, kind, default=None, required=False):
        if name not in self.data or self.data[name] is None:
            if required:
                raise ConfigError(f"{self.key(name)}: required key missing")
            return default
        value = self.data[name]
        try:
            if kind is float:
                if isinstance(value, bool):
                    raise TypeError
                return float(value)
            if kind is int:
                if isinstance(value, bool) or int(value) != value:
                    raise TypeError
                return int(value)
            if kind is str:
                if not isinstance(value, str):
                    raise TypeError
                return value
            return kind(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{self.key(name)}: expected {kind.__name__}, got {value!r}") from None

    def section(self, name, allowed):
        return _Section(self.data.get(name), self.key(name), allowed)


def _vector3(value, key):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected three numbers") from None
    if arr.shape != (3,):
        raise ConfigError(f"{key}: expected three numbers, got {value!r}")
    return arr


def _amplitude(value, key):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{key}: complex amplitude must be [re, im]")
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(float(value))
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number or [re, im]") from None


def _frequencies(value, key):
    if isinstance(value, dict):
        sec = _Section(value, key, {"start", "stop", "step"})
        start = sec.get("start", float, required=True)
        stop = sec.get("stop", float, default=start)
        step = sec.get("step", float, default=1.0)
        if not (start > 0 and step > 0 and stop >= start):
            raise ConfigError(f"{key}: need 0 < start <= stop and step > 0")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(np.round(start + i * step, 9)) for i in range(n))
    if isinstance(value, (list, tuple)):
        freqs = tuple(float(f) for f in value)
    else:
        freqs = (float(value),)
    if any(not f > 0 for f in freqs):
        raise ConfigError(f"{key}: frequencies must be positive")
    return freqs


def parse_config(data, source_path=None):
    """Build an :class:`ExperimentConfig` from already-parsed YAML data."""
    root = _Section(data, "", _TOP_KEYS)

    sc = root.section("scene", {"speed_of_sound", "region", "sources"})
    region = sc.section("region", {"center", "radius"})
    center = _vector3(region.data.get("center", [0.0, 0.0, 0.0]), region.key("center"))
    radius = region.get("radius", float, default=0.40)
    sources = []
    raw_sources = sc.data.get("sources")
    if not isinstance(raw_sources, list) or not raw_sources:
        raise ConfigError("scene.sources: expected a non-empty list")
    for i, raw in enumerate(raw_sources):
        s = _Section(raw, f"scene.sources[{i}]", {"position", "amplitude"})
        if "position" not in s.data:
            raise ConfigError(f"{s.key('position')}: required key missing")
        pos = _vector3(s.data["position"], s.key("position"))
        amp = _amplitude(s.data.get("amplitude", 1.0), s.key("amplitude"))
        sources.append(PointSource(pos, amp))
    try:
        scene = Scene(tuple(sources), sc.get("speed_of_sound", float, default=340.0), Sphere(center, radius))
    except SceneError as exc:
        raise ConfigError(f"scene: {exc}") from None

    mics = root.section("microphones", {"layers"})
    raw_layers = mics.data.get("layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ConfigError("microphones.layers: expected a non-empty list")
    layers = []
    for i, raw in enumerate(raw_layers):
        s = _Section(raw, f"microphones.layers[{i}]", {"count", "radius", "point_set"})
        point_set = s.get("point_set", str, default="t-design")
        if point_set not in POINT_SETS:
            raise ConfigError(f"{s.key('point_set')}: expected one of {POINT_SETS}")
        count = s.get("count", int, required=True)
        lradius = s.get("radius", float, required=True)
        if count < 1 or lradius <= 0:
            raise ConfigError(f"{s.key('count')}: count and radius must be positive")
        layers.append(MicLayer(count, lradius, point_set))

    obs = root.section("observation", {"snr_db", "seeds"})
    seeds = obs.data.get("seeds", [0])
    if isinstance(seeds, int):
        seeds = [seeds]
    if not isinstance(seeds, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in seeds):
        raise ConfigError("observation.seeds: expected a list of integers")

    b = root.section("bank", {"d_eta", "d_beta", "beta_start", "beta_step", "zeniths_deg"})
    zen = b.data.get("zeniths_deg", [90.0])
    if not isinstance(zen, list) or not zen:
        raise ConfigError("bank.zeniths_deg: expected a non-empty list")
    bank = BankConfig(
        d_eta=b.get("d_eta", int, default=10),
        d_beta=b.get("d_beta", int, default=10),
        beta_start=b.get("beta_start", float, default=0.0),
        beta_step=b.get("beta_step", float, default=1.0),
        zeniths_deg=tuple(float(z) for z in zen),
    )
    if bank.d_eta < 1 or bank.d_beta < 1 or bank.beta_start < 0 or bank.beta_step <= 0:
        raise ConfigError("bank: need d_eta, d_beta >= 1, beta_start >= 0, beta_step > 0")

    methods = data.get("methods", list(METHODS)) if isinstance(data, dict) else list(METHODS)
    if not isinstance(methods, list):
        raise ConfigError("methods: expected a list")

    ev = root.section("evaluation", {"grid_spacing", "slices"})
    slices = ev.data.get("slices") or []
    if not isinstance(slices, list) or any(not isinstance(p, str) for p in slices):
        raise ConfigError("evaluation.slices: expected a list of plane strings such as 'z=0'")

    l1 = root.section("l1", {"max_outer_iters", "j_rel_tol", "gamma_tol", "line_search_iters"})
    l2 = root.section("l2", {"max_iters", "sigma", "gamma_rel_tol"})
    out = root.section("output", {"directory", "format"})
    try:
        l1_opts = L1Options(
            max_outer_iters=l1.get("max_outer_iters", int, default=200),
            j_rel_tol=l1.get("j_rel_tol", float, default=1e-6),
            gamma_tol=l1.get("gamma_tol", float, default=1e-10),
            line_search_iters=l1.get("line_search_iters", int, default=20),
        )
        l2_opts = L2Options(
            max_iters=l2.get("max_iters", int, default=500),
            sigma=l2.get("sigma", float, default=0.5),
            gamma_rel_tol=l2.get("gamma_rel_tol", float, default=1e-6),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"l1/l2: {exc}") from None

    return ExperimentConfig(
        scene=scene,
        layers=tuple(layers),
        bank=bank,
        lam=root.get("lambda", float, default=DEFAULT_LAMBDA),
        methods=tuple(methods),
        frequencies=_frequencies(data.get("frequencies", {"start": 100, "stop": 1000, "step": 100}),
                                 "frequencies"),
        snr_db=obs.get("snr_db", float),
        seeds=tuple(seeds),
        grid_spacing=ev.get("grid_spacing", float, default=0.05),
        slices=tuple(slices),
        l1=l1_opts,
        l2=l2_opts,
        output_dir=out.get("directory", str, default="results"),
        output_format=out.get("format", str, default="csv"),
        name=root.get("name", str, default="experiment"),
        source_path=source_path,
    )


def _locate(text, key_path):
    """Line number (1-based) of a dotted key path in YAML text, if found."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return None
    line = None
    for part in key_path.replace("]", "").replace("[", ".").split("."):
        if node is None or not part:
            break
        if isinstance(node, yaml.MappingNode):
            match = [(k, v) for k, v in node.value if k.value == part]
            if not match:
                break
            line = match[0][0].start_mark.line + 1
            node = match[0][1]
        elif isinstance(node, yaml.SequenceNode) and part.isdigit() and int(part) < len(node.value):
            node = node.value[int(part)]
            line = node.start_mark.line + 1
        else:
            break
    return line


def resolve_config_path(name_or_path):
    """Accept a file path or the name of a shipped configuration."""
    p = Path(name_or_path)
    if p.exists():
        return p
    key = p.stem if p.suffix in (".yaml", ".yml") else str(name_or_path)
    if key in SHIPPED:
        return resources.files("sfmkl").joinpath("data", SHIPPED[key])
    raise ConfigError(f"{name_or_path}: no such file or shipped configuration")


def load_config(name_or_path):
    """Read and validate a YAML configuration file."""
    path = resolve_config_path(name_or_path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"{path}: YAML syntax error{where}: {getattr(exc, 'problem', exc)}") from None
    try:
        return parse_config(data, source_path=str(path))
    except ConfigError as exc:
        msg = str(exc)
        line = _locate(text, msg.split(":", 1)[0])
        where = f" (line {line})" if line else ""
        raise ConfigError(f"{path}{where}: {msg}") from None
