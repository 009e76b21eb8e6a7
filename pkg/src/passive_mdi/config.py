"""Flat scenario configuration with the simulation defaults.

Config files are JSON objects of scalars; every key must be a field below.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .estimator import GRID_SIZE_DEFAULT, FluctuationParams
from .fock_bsm import N_CUT_DEFAULT, ChannelParams
from .key_rate import RateModel, SecurityParams
from .optimizer import OptimizationSpec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    command: str = "keyrate"
    out: str = "-"
    seed: int = 42
    grid: str = ""
    # operating point
    mu: float = 0.3
    t: float = 0.3
    distance: float = 50.0
    n_pulses: float = 1e9
    # local (heralding) detectors
    eta_A: float = 0.75
    d_A: float = 1e-6
    # channel and relay
    loss_coeff: float = 0.2
    eta_C: float = 0.4
    d_C: float = 1e-7
    e_d: float = 0.015
    e_0: float = 0.5
    accept: str = "both"
    # security
    f: float = 1.16
    eps_cor: float = 1e-7
    eps_prime: float = 1e-7
    eps_hat: float = 1e-7
    eps_PA: float = 1e-7
    epsilon: float = 1e-7
    fluctuation: str = "gaussian"
    # optimizer
    mu_min: float = 0.01
    mu_max: float = 1.5
    t_min: float = 0.01
    t_max: float = 0.4999
    multistart: int = 5
    rtol: float = 1e-4
    max_evals: int = 400
    # numerics
    grid_size: int = GRID_SIZE_DEFAULT
    n_cut_yield: int = N_CUT_DEFAULT
    observation: str = "expected"

    @classmethod
    def from_dict(cls, data):
        fields = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(fields))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        values = {}
        for key, raw in data.items():
            kind = type(fields[key].default)
            try:
                values[key] = kind(float(raw)) if kind is int else kind(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self):
        return dataclasses.asdict(self)

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def override(self, **changes):
        return self.from_dict({**self.to_dict(), **{k: v for k, v in changes.items() if v is not None}})

    def model(self):
        channel = ChannelParams(
            loss_coeff=self.loss_coeff, eta_C=self.eta_C, d_C=self.d_C,
            e_d=self.e_d, e_0=self.e_0, accept=self.accept,
        )
        sec = SecurityParams(
            eps_cor=self.eps_cor, eps_prime=self.eps_prime, eps_hat=self.eps_hat,
            eps_PA=self.eps_PA, f=self.f,
        )
        return RateModel(
            eta_A=self.eta_A, d_A=self.d_A, channel=channel, sec=sec,
            fluct=FluctuationParams(epsilon=self.epsilon, method=self.fluctuation),
            grid_size=self.grid_size, n_cut_yield=self.n_cut_yield,
            observation=self.observation, seed=self.seed,
        )

    def spec(self):
        return OptimizationSpec(
            mu_bounds=(self.mu_min, self.mu_max), t_bounds=(self.t_min, self.t_max),
            multistart=self.multistart, rtol=self.rtol, max_evals=self.max_evals, seed=self.seed,
        )
