"""Scenario files: the JSON surface of the CLI.

Schema (all fields optional, defaults reproduce the benchmark setup):

    {
      "array":  {"n_antennas": 10, "spacing_wl": 0.5,
                 "psi_max": 1.0472, "phi_max": 1.0472,
                 "directivity_p": 1.0, "g_max": 4.0},
      "region": {"intervals": [[-0.1, 0.1], ...]},      # radians
      "total_q": 1000,
      "algo":   {"ao_tol": 1e-5, "sca_tol": 1e-4, "sdr_tol": 1e-4,
                 "penalty_init": 1e-3, "penalty_growth": 1.2,
                 "rank_delta": 1e-4, "logdet_eps": 1e-6,
                 "outer_grid_l": 100, "max_ao_iters": 30,
                 "max_sca_iters": 50, "max_penalty_iters": 50},
      "schemes": ["HR6DMA", "AntennaRA", "ArrayRA", "NRA", "ARS", "CSAR"],
      "link":   {"tx_power": 1.0, "ref_gain": 1.0, "distance_m": 100.0,
                 "pathloss_exp": 2.5, "wavelength_m": 0.1}  # or null
      "seed":   0
    }

The seed is reserved for randomized tooling; the solve pipeline is
deterministic and ignores it.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .baselines import SCHEME_ORDER, SchemeId
from .errors import (RotabeamError, ScenarioParseError, ScenarioSchemaError,
                     ScenarioValidationError)
from .model import ArrayConfig, CoverageRegion, LinkBudget
from .optimizer import AlgoSettings

DEFAULT_REGION = ((-0.1, 0.1),)


@dataclass
class Scenario:
    array: ArrayConfig = field(default_factory=ArrayConfig)
    region: CoverageRegion = field(default_factory=lambda: CoverageRegion(DEFAULT_REGION))
    total_q: int = 1000
    algo: AlgoSettings = field(default_factory=AlgoSettings)
    schemes: tuple = SCHEME_ORDER
    link: LinkBudget | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.schemes:
            raise ScenarioValidationError("schemes: list must be nonempty")
        if len(set(self.schemes)) != len(self.schemes):
            raise ScenarioValidationError("schemes: duplicates are not allowed")

    def to_dict(self) -> dict:
        return {
            "array": dataclasses.asdict(self.array),
            "region": {"intervals": [list(iv) for iv in self.region.intervals]},
            "total_q": self.total_q,
            "algo": dataclasses.asdict(self.algo),
            "schemes": [s.value for s in self.schemes],
            "link": dataclasses.asdict(self.link) if self.link else None,
            "seed": self.seed,
        }


def write_scenario(scenario: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario.to_dict(), fh, indent=2, sort_keys=False)
        fh.write("\n")


_ALLOWED_TOP = {"array", "region", "total_q", "algo", "schemes", "link", "seed"}


def _check_fields(raw: dict, allowed, where: str):
    if not isinstance(raw, dict):
        raise ScenarioSchemaError(f"{where}: expected an object")
    for key in raw:
        if key not in allowed:
            raise ScenarioSchemaError(f"{where}.{key}: unknown field")


def _number(raw, where: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ScenarioSchemaError(f"{where}: expected a number")
    return float(raw)


def _build(cls, raw: dict, where: str, err=ScenarioValidationError):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    _check_fields(raw, fields, where)
    kwargs = {}
    for key, value in raw.items():
        if fields[key].type in ("int", int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ScenarioSchemaError(f"{where}.{key}: expected an integer")
            kwargs[key] = value
        else:
            kwargs[key] = _number(value, f"{where}.{key}")
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ScenarioSchemaError(f"{where}: {exc}") from exc
    except RotabeamError as exc:
        raise err(f"{where}: {exc}") from exc


def scenario_from_dict(raw: dict) -> Scenario:
    _check_fields(raw, _ALLOWED_TOP, "scenario")
    array = _build(ArrayConfig, raw.get("array", {}), "array")
    algo = _build(AlgoSettings, raw.get("algo", {}), "algo")

    region_raw = raw.get("region", {"intervals": [list(iv) for iv in DEFAULT_REGION]})
    _check_fields(region_raw, {"intervals"}, "region")
    ivs_raw = region_raw.get("intervals")
    if not isinstance(ivs_raw, list) or not ivs_raw:
        raise ScenarioSchemaError("region.intervals: expected a nonempty list")
    ivs = []
    for i, pair in enumerate(ivs_raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ScenarioSchemaError(f"region.intervals[{i}]: expected [alpha, beta]")
        ivs.append((_number(pair[0], f"region.intervals[{i}][0]"),
                    _number(pair[1], f"region.intervals[{i}][1]")))
        if ivs[-1][1] < ivs[-1][0]:
            raise ScenarioValidationError(f"region.intervals[{i}]: beta < alpha")
    try:
        region = CoverageRegion(tuple(ivs))
    except RotabeamError as exc:
        raise ScenarioValidationError(f"region: {exc}") from exc

    total_q = raw.get("total_q", 1000)
    if isinstance(total_q, bool) or not isinstance(total_q, int):
        raise ScenarioSchemaError("total_q: expected an integer")

    schemes_raw = raw.get("schemes")
    if schemes_raw is None:
        schemes = SCHEME_ORDER
    else:
        if not isinstance(schemes_raw, list):
            raise ScenarioSchemaError("schemes: expected a list of names")
        schemes = []
        for i, name in enumerate(schemes_raw):
            try:
                schemes.append(SchemeId(name))
            except ValueError:
                raise ScenarioSchemaError(
                    f"schemes[{i}]: unknown scheme {name!r}") from None
        schemes = tuple(schemes)

    link_raw = raw.get("link")
    link = None
    if link_raw is not None:
        link = _build(LinkBudget, link_raw, "link")

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioSchemaError("seed: expected an integer")

    try:
        return Scenario(array=array, region=region, total_q=total_q, algo=algo,
                        schemes=schemes, link=link, seed=seed)
    except RotabeamError as exc:
        raise ScenarioValidationError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    return scenario_from_dict(raw)
