"""Declarative scenario configs: JSON schema, validation, experiment building.

A scenario file describes one TPM experiment: dimension, inverse
temperature, initial state, the two Hamiltonians, the channel, and the two
measurements. Complex matrices are serialized as separate ``re`` and
``im`` row-major arrays of arrays; ``im`` may be omitted for real
matrices.

All randomness (random Hamiltonians, Haar channels, sampling) is derived
from the scenario's 64-bit ``seed`` mixed with a fixed role index, so a
config plus a seed pins every number in the run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .quantum import (
    DensityMatrix,
    GibbsEnsemble,
    KrausChannel,
    ProjectorFamily,
    channel_from_unitary,
    eigen_measurement,
    gibbs_ensemble,
    maximally_mixed,
    standard_channel,
    unitary_from_hamiltonian,
)
from .linalg import haar_random_unitary, random_hermitian
from .tpm import DEFAULT_SUPPORT_EPSILON, TpmExperiment

__all__ = [
    "ScenarioConfig",
    "BuiltScenario",
    "load_scenario",
    "scenario_from_dict",
    "build_scenario",
    "derive_seed",
]

# Fixed role indices mixed into the seed so each random ingredient gets an
# independent, reproducible stream.
ROLE_FIRST_HAMILTONIAN = 0
ROLE_SECOND_HAMILTONIAN = 1
ROLE_CHANNEL = 2
ROLE_SAMPLER = 3
ROLE_SWEEP = 4

_REQUIRED_FIELDS = ("name", "dim", "beta", "initial", "first_hamiltonian",
                    "channel", "second_hamiltonian")
_OPTIONAL_FIELDS = ("first_measurement", "second_measurement", "tolerances",
                    "seed")
_CHANNEL_PARAM_KEYS = {
    "dephasing": "p",
    "depolarizing": "p",
    "amplitude_damping": "gamma",
    "unitary_from_hamiltonian": "time",
}


def derive_seed(base_seed: int, *key: int) -> int:
    """Mix a base seed with integer role/indices into a fresh 64-bit seed."""
    ss = np.random.SeedSequence(entropy=int(base_seed),
                                spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario description (specs still in raw dict form)."""

    name: str
    dim: int
    beta: float
    initial: dict
    first_hamiltonian: dict
    channel: dict
    second_hamiltonian: dict
    first_measurement: dict = field(default_factory=lambda: {"kind": "eigenbasis"})
    second_measurement: dict = field(default_factory=lambda: {"kind": "eigenbasis"})
    tolerances: dict = field(default_factory=dict)
    seed: int = 0


@dataclass(frozen=True)
class BuiltScenario:
    """A ScenarioConfig turned into live objects, ready to evaluate."""

    config: ScenarioConfig
    experiment: TpmExperiment
    first_ensemble: GibbsEnsemble
    second_ensemble: GibbsEnsemble
    first_energies: tuple[float, ...]
    second_energies: tuple[float, ...]
    support_epsilon: float


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON in {path} at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return scenario_from_dict(raw, source=str(path))


def scenario_from_dict(raw: dict, source: str = "<dict>") -> ScenarioConfig:
    """Validate a raw config dict into a :class:`ScenarioConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: config must be a JSON object")
    for name in _REQUIRED_FIELDS:
        if name not in raw:
            raise ConfigError(f"{source}: missing required field {name!r}",
                              field=name)
    unknown = set(raw) - set(_REQUIRED_FIELDS) - set(_OPTIONAL_FIELDS)
    if unknown:
        raise ConfigError(
            f"{source}: unknown fields {sorted(unknown)}",
            field=sorted(unknown)[0])

    name = raw["name"]
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{source}: 'name' must be a nonempty string",
                          field="name")
    dim = raw["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ConfigError(f"{source}: 'dim' must be a positive integer",
                          field="dim")
    beta = raw["beta"]
    if not isinstance(beta, (int, float)) or isinstance(beta, bool) or beta <= 0:
        raise ConfigError(f"{source}: 'beta' must be a positive number",
                          field="beta")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"{source}: 'seed' must be a non-negative integer",
                          field="seed")
    for spec_name in ("initial", "first_hamiltonian", "channel",
                      "second_hamiltonian", "first_measurement",
                      "second_measurement", "tolerances"):
        if spec_name in raw and not isinstance(raw[spec_name], dict):
            raise ConfigError(f"{source}: {spec_name!r} must be an object",
                              field=spec_name)
    tolerances = dict(raw.get("tolerances", {}))
    unknown_tol = set(tolerances) - {"support_epsilon"}
    if unknown_tol:
        raise ConfigError(
            f"{source}: unknown tolerance overrides {sorted(unknown_tol)}",
            field="tolerances")
    return ScenarioConfig(
        name=name, dim=dim, beta=float(beta),
        initial=dict(raw["initial"]),
        first_hamiltonian=dict(raw["first_hamiltonian"]),
        channel=dict(raw["channel"]),
        second_hamiltonian=dict(raw["second_hamiltonian"]),
        first_measurement=dict(raw.get("first_measurement",
                                       {"kind": "eigenbasis"})),
        second_measurement=dict(raw.get("second_measurement",
                                        {"kind": "eigenbasis"})),
        tolerances=tolerances, seed=seed)


def _parse_matrix(spec, dim: int, field_name: str) -> np.ndarray:
    if not isinstance(spec, dict) or "re" not in spec:
        raise ConfigError(
            f"matrix spec for {field_name!r} must be an object with 're' "
            "(and optionally 'im') arrays", field=field_name)
    try:
        re_part = np.array(spec["re"], dtype=float)
        im_part = (np.array(spec["im"], dtype=float) if "im" in spec
                   else np.zeros_like(re_part))
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"matrix entries for {field_name!r} are not numeric: {exc}",
            field=field_name) from exc
    if re_part.shape != (dim, dim) or im_part.shape != (dim, dim):
        raise ConfigError(
            f"matrix for {field_name!r} must be {dim}x{dim}, got "
            f"re {re_part.shape}, im {im_part.shape}", field=field_name)
    return re_part + 1j * im_part


def _kind_of(spec: dict, field_name: str, allowed: tuple[str, ...]) -> str:
    kind = spec.get("kind")
    if kind not in allowed:
        raise ConfigError(
            f"{field_name!r} kind must be one of {allowed}, got {kind!r}",
            field=field_name)
    return kind


def _build_hamiltonian(spec: dict, dim: int, seed: int, role: int,
                       field_name: str) -> np.ndarray:
    kind = _kind_of(spec, field_name, ("diagonal", "explicit", "random"))
    if kind == "diagonal":
        energies = spec.get("energies")
        if not isinstance(energies, list) or len(energies) != dim:
            raise ConfigError(
                f"{field_name!r} diagonal spec needs an 'energies' list of "
                f"length {dim}", field=f"{field_name}.energies")
        return np.diag(np.array(energies, dtype=float)).astype(np.complex128)
    if kind == "explicit":
        return _parse_matrix(spec.get("matrix"), dim, field_name)
    rng = np.random.default_rng(derive_seed(seed, role))
    return random_hermitian(dim, rng, scale=float(spec.get("scale", 1.0)))


def _build_measurement(spec: dict, hamiltonian: np.ndarray,
                       field_name: str) -> ProjectorFamily:
    kind = _kind_of(spec, field_name, ("eigenbasis", "projectors"))
    if kind == "eigenbasis":
        gap = spec.get("degeneracy_gap")
        return eigen_measurement(hamiltonian,
                                 None if gap is None else float(gap))
    mats = spec.get("projectors")
    if not isinstance(mats, list) or not mats:
        raise ConfigError(
            f"{field_name!r} needs a nonempty 'projectors' list",
            field=f"{field_name}.projectors")
    energies = spec.get("energies")
    if not isinstance(energies, list) or len(energies) != len(mats):
        raise ConfigError(
            f"{field_name!r} explicit projector lists must carry an "
            "'energies' list of the same length (needed for the work "
            "statistics columns)", field=f"{field_name}.energies")
    dim = hamiltonian.shape[0]
    parsed = [_parse_matrix(m, dim, f"{field_name}.projectors[{k}]")
              for k, m in enumerate(mats)]
    return ProjectorFamily(parsed, [float(e) for e in energies])


def _build_channel(config: ScenarioConfig,
                   second_hamiltonian: np.ndarray) -> KrausChannel:
    spec = config.channel
    kind = _kind_of(spec, "channel",
                    ("identity", "dephasing", "depolarizing",
                     "amplitude_damping", "haar_random",
                     "unitary_from_hamiltonian", "kraus"))
    dim = config.dim
    if kind == "identity":
        return standard_channel("identity", dim)
    if kind in ("dephasing", "depolarizing", "amplitude_damping"):
        key = _CHANNEL_PARAM_KEYS[kind]
        if key not in spec:
            raise ConfigError(f"channel kind {kind!r} requires {key!r}",
                              field=f"channel.{key}")
        return standard_channel(kind, dim, float(spec[key]))
    if kind == "haar_random":
        rng = np.random.default_rng(derive_seed(config.seed, ROLE_CHANNEL))
        return channel_from_unitary(haar_random_unitary(dim, rng))
    if kind == "unitary_from_hamiltonian":
        t = float(spec.get("time", 1.0))
        return channel_from_unitary(
            unitary_from_hamiltonian(second_hamiltonian, t))
    mats = spec.get("operators")
    if not isinstance(mats, list) or not mats:
        raise ConfigError("kraus channel needs a nonempty 'operators' list",
                          field="channel.operators")
    parsed = [_parse_matrix(m, dim, f"channel.operators[{k}]")
              for k, m in enumerate(mats)]
    return KrausChannel(parsed)


def _build_initial(config: ScenarioConfig,
                   first_ensemble: GibbsEnsemble) -> DensityMatrix:
    kind = _kind_of(config.initial, "initial",
                    ("gibbs", "maximally_mixed", "explicit"))
    if kind == "gibbs":
        return first_ensemble.state
    if kind == "maximally_mixed":
        return maximally_mixed(config.dim)
    return DensityMatrix(_parse_matrix(config.initial.get("matrix"),
                                       config.dim, "initial"))


def build_scenario(config: ScenarioConfig) -> BuiltScenario:
    """Turn a validated config into live objects.

    Raises :class:`ConfigError` for schema-level problems and
    :class:`~tpm_lab.errors.ValidationError` when a constructed object
    violates its invariants (e.g. an explicit state that is not PSD).
    """
    h_first = _build_hamiltonian(config.first_hamiltonian, config.dim,
                                 config.seed, ROLE_FIRST_HAMILTONIAN,
                                 "first_hamiltonian")
    h_second = _build_hamiltonian(config.second_hamiltonian, config.dim,
                                  config.seed, ROLE_SECOND_HAMILTONIAN,
                                  "second_hamiltonian")
    first_ensemble = gibbs_ensemble(h_first, config.beta)
    second_ensemble = gibbs_ensemble(h_second, config.beta)
    first_meas = _build_measurement(config.first_measurement, h_first,
                                    "first_measurement")
    second_meas = _build_measurement(config.second_measurement, h_second,
                                     "second_measurement")
    channel = _build_channel(config, h_second)
    initial = _build_initial(config, first_ensemble)
    experiment = TpmExperiment(initial_state=initial,
                               first_measurement=first_meas,
                               channel=channel,
                               second_measurement=second_meas)
    support_epsilon = float(config.tolerances.get("support_epsilon",
                                                  DEFAULT_SUPPORT_EPSILON))
    return BuiltScenario(
        config=config, experiment=experiment,
        first_ensemble=first_ensemble, second_ensemble=second_ensemble,
        first_energies=tuple(first_meas.energies),
        second_energies=tuple(second_meas.energies),
        support_epsilon=support_epsilon)


def sweep_configs(config: ScenarioConfig, parameter: str,
                  values) -> list[ScenarioConfig]:
    """Expand a config into one variant per sweep value.

    Each variant gets a deterministic seed derived from the base seed and
    its position in the value list, and a name suffixed with the swept
    parameter so report rows stay distinguishable.
    """
    if parameter not in ("beta", "channel_param", "dim"):
        raise ValueError(
            f"unknown sweep parameter {parameter!r}; "
            "expected 'beta', 'channel_param' or 'dim'")
    variants = []
    for k, value in enumerate(values):
        seed_k = derive_seed(config.seed, ROLE_SWEEP, k)
        label = f"{config.name}[{parameter}={value:g}]"
        if parameter == "beta":
            if value <= 0:
                raise ValueError(f"swept beta must be positive, got {value}")
            variants.append(replace(config, beta=float(value), seed=seed_k,
                                    name=label))
        elif parameter == "channel_param":
            kind = config.channel.get("kind")
            key = _CHANNEL_PARAM_KEYS.get(kind)
            if key is None:
                raise ValueError(
                    f"channel kind {kind!r} has no sweepable parameter")
            channel = dict(config.channel)
            channel[key] = float(value)
            variants.append(replace(config, channel=channel, seed=seed_k,
                                    name=label))
        else:
            dim = int(value)
            if dim != value or dim < 1:
                raise ValueError(
                    f"swept dim must be a positive integer, got {value}")
            variants.append(replace(config, dim=dim, seed=seed_k, name=label))
    return variants
