"""Scenario parameters and the flat ``key = value`` config format."""

import math
from dataclasses import dataclass, field, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .policy import PolicyKind, PolicyName
from .radio import CellLayout, PathLossModel

MC_SUCCESS_MODELS = ("selection", "independent")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one replication.

    Defaults are the reference scenario: 10 users active with probability
    0.3 per 0.125 ms mini-slot, 6-slot budget, HARQ RTT of 2 slots, 10%
    initial BLER and 32-byte packets.
    """

    n_users: int = 10
    activation_prob: float = 0.3
    tti_ms: float = 0.125
    harq_rtt_ttis: int = 2
    initial_budget_ttis: int = 6
    initial_bler: float = 0.1
    payload_bits: float = 256.0
    policy: PolicyKind = field(default_factory=PolicyKind)
    layout: CellLayout = field(default_factory=CellLayout)
    pathloss: PathLossModel = field(default_factory=PathLossModel)
    n_slots: int = 100_000
    seed: int = 0
    fading: bool = True
    fixed_position: tuple = None
    mc_success: str = "selection"
    quantize_blocklength: bool = False

    def __post_init__(self):
        if self.n_users < 0:
            raise ValueError("n_users must be >= 0")
        if not 0.0 <= self.activation_prob <= 1.0:
            raise ValueError(f"activation_prob={self.activation_prob} outside [0, 1]")
        if self.tti_ms <= 0:
            raise ValueError("tti_ms must be positive")
        if self.harq_rtt_ttis < 1:
            raise ValueError("harq_rtt_ttis must be >= 1")
        if self.initial_budget_ttis < 1:
            raise ValueError("initial_budget_ttis must be >= 1")
        if not 0.0 < self.initial_bler < 1.0:
            raise ValueError("initial_bler must lie in (0, 1)")
        if self.payload_bits <= 0:
            raise ValueError("payload_bits must be positive")
        if self.n_slots < 0:
            raise ValueError("n_slots must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.mc_success not in MC_SUCCESS_MODELS:
            raise ValueError(f"mc_success must be one of {MC_SUCCESS_MODELS}")

    @property
    def max_attempts(self):
        """Attempts that fit the budget: attempt k needs (k-1)*RTT + 1 slots."""
        return (self.initial_budget_ttis - 1) // self.harq_rtt_ttis + 1

    def with_policy(self, kind, **kw):
        return replace(self, policy=replace(self.policy, kind=PolicyName(kind), **kw))


class ConfigError(ValueError):
    pass


_POLICY_ALIASES = {
    "sc": PolicyName.SC,
    "single": PolicyName.SC,
    "legacy": PolicyName.LEGACY_MC,
    "legacy_mc": PolicyName.LEGACY_MC,
    "latency_aware": PolicyName.LATENCY_AWARE_MC,
    "latency_aware_mc": PolicyName.LATENCY_AWARE_MC,
}

_TOP = {f.name: f.type for f in fields(ScenarioConfig)
        if f.name not in ("policy", "layout", "pathloss", "fixed_position")}
_INT_KEYS = {"n_users", "harq_rtt_ttis", "initial_budget_ttis", "n_slots", "seed"}
_BOOL_KEYS = {"fading", "quantize_blocklength"}
_POLICY_KEYS = {"policy", "delta_mc_db", "tau_ttis"}
_LAYOUT_KEYS = {"inter_site_distance", "macro_radius", "small_radius"}
_PATHLOSS_KEYS = {"pathloss_exponent", "edge_snr_db", "min_distance"}
KNOWN_KEYS = set(_TOP) | _POLICY_KEYS | _LAYOUT_KEYS | _PATHLOSS_KEYS | {"fixed_position"}


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if line.split("=", 1)[0].strip() == key:
            return i
    return None


def _where(text, key):
    line = _line_of(text, key)
    return f"line {line}, key '{key}'" if line else f"key '{key}'"


def _coerce(text, key, value):
    if key in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"{_where(text, key)}: expected true/false, got {value!r}")
        return value
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{_where(text, key)}: expected an integer, got {value!r}")
        return value
    if key in ("policy", "mc_success"):
        if not isinstance(value, str):
            raise ConfigError(f"{_where(text, key)}: expected a string, got {value!r}")
        return value
    if key == "fixed_position":
        if not (isinstance(value, list) and len(value) == 2):
            raise ConfigError(f"{_where(text, key)}: expected [x, y]")
        return tuple(float(v) for v in value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{_where(text, key)}: expected a number, got {value!r}")
    return float(value)


def parse_config(text):
    """Parse flat ``key = value`` text into a :class:`ScenarioConfig`.

    Missing keys keep their defaults; unknown keys and out-of-range values
    raise :class:`ConfigError` naming the offending line and key.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc

    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{_where(text, unknown[0])}: unknown key")
    vals = {k: _coerce(text, k, v) for k, v in raw.items()}

    pol = {}
    if "policy" in vals:
        name = vals.pop("policy").lower()
        if name not in _POLICY_ALIASES:
            raise ConfigError(f"{_where(text, 'policy')}: unknown policy {name!r}")
        pol["kind"] = _POLICY_ALIASES[name]
    for k in ("delta_mc_db", "tau_ttis"):
        if k in vals:
            pol[k] = vals.pop(k)

    lay = {}
    if "inter_site_distance" in vals:
        lay["small_position"] = (vals.pop("inter_site_distance"), 0.0)
    for k in ("macro_radius", "small_radius"):
        if k in vals:
            lay[k] = vals.pop(k)

    pl = {}
    for src, dst in (("pathloss_exponent", "exponent"), ("edge_snr_db", "reference_snr_edge_db"),
                     ("min_distance", "min_distance")):
        if src in vals:
            pl[dst] = vals.pop(src)

    try:
        return ScenarioConfig(policy=PolicyKind(**pol), layout=CellLayout(**lay),
                              pathloss=PathLossModel(**pl), **vals)
    except ValueError as exc:
        key = next((k for k in raw if k in str(exc)), None)
        where = f"{_where(text, key)}: " if key else ""
        raise ConfigError(f"{where}{exc}") from exc


def format_config(cfg):
    """Inverse of :func:`parse_config` for the keys it understands."""
    tau = cfg.policy.tau_ttis
    rows = [
        ("n_users", cfg.n_users),
        ("activation_prob", cfg.activation_prob),
        ("tti_ms", cfg.tti_ms),
        ("harq_rtt_ttis", cfg.harq_rtt_ttis),
        ("initial_budget_ttis", cfg.initial_budget_ttis),
        ("initial_bler", cfg.initial_bler),
        ("payload_bits", cfg.payload_bits),
        ("policy", f'"{cfg.policy.kind.value}"'),
        ("delta_mc_db", cfg.policy.delta_mc_db),
        ("tau_ttis", "inf" if math.isinf(tau) else tau),
        ("inter_site_distance", cfg.layout.inter_site_distance),
        ("macro_radius", cfg.layout.macro_radius),
        ("small_radius", cfg.layout.small_radius),
        ("pathloss_exponent", cfg.pathloss.exponent),
        ("edge_snr_db", cfg.pathloss.reference_snr_edge_db),
        ("min_distance", cfg.pathloss.min_distance),
        ("n_slots", cfg.n_slots),
        ("seed", cfg.seed),
        ("fading", str(cfg.fading).lower()),
        ("mc_success", f'"{cfg.mc_success}"'),
        ("quantize_blocklength", str(cfg.quantize_blocklength).lower()),
    ]
    return "".join(f"{k} = {v}\n" for k, v in rows)
