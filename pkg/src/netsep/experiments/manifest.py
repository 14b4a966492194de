"""Experiment manifests: one validated schema per CLI subcommand.

Unknown fields are rejected everywhere.  A manifest plus its master seed
fully determines the result files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from ..errors import InvalidArgument
from ..netsim.config import ChannelCfg, MeasureCfg, NetworkCfg, load_structured


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class _Base(_Strict):
    name: str | None = None
    seed: int = Field(default=0, ge=0, lt=2**64)


class CapacityManifest(_Base):
    scenario: Literal["capacity"]
    channel: ChannelCfg
    power_budget: float | None = None
    tol: float = Field(default=1e-9, gt=0)


class RdManifest(_Base):
    scenario: Literal["rd"]
    source: list[float]
    measure: Union[Literal["hamming"], MeasureCfg] = "hamming"
    distortions: list[float] = Field(min_length=1)
    tol: float = Field(default=1e-7, gt=0)


class EmulateManifest(_Base):
    scenario: Literal["emulate"]
    channel: ChannelCfg
    input: list[float] | None = None
    rates: list[float] | None = None
    rate_offsets: list[float] | None = None
    blocklengths: list[int] = Field(min_length=1)
    epsilon: float = Field(default=0.1, gt=0)
    trials: int = Field(default=100, ge=1)
    mode: Literal["auto", "explicit", "ensemble"] = "auto"

    @model_validator(mode="after")
    def _one_grid(self):
        if (self.rates is None) == (self.rate_offsets is None):
            raise ValueError("give exactly one of 'rates' or 'rate_offsets'")
        grid = self.rates if self.rates is not None else self.rate_offsets
        if not grid:
            raise ValueError("the rate grid must be non-empty")
        return self


class SeparateManifest(_Base):
    scenario: Literal["separate"]
    network: Union[NetworkCfg, str]
    scheme: Literal["rate_distortion", "slepian_wolf"]
    layers: int = Field(ge=1)
    n: int = Field(default=1, ge=1)
    L: int = Field(default=1, ge=1)
    rates: dict[str, float] = {}
    repeats: int = Field(default=1, ge=1)
    rd_bits: int | None = Field(default=None, ge=0)
    trials: int = Field(default=1000, ge=1)
    mc_trials: int = Field(default=2000, ge=1)
    schedule: Literal["quanta", "end"] = "quanta"


class PatchManifest(_Base):
    scenario: Literal["patch"]
    network: Union[NetworkCfg, str]
    pair: tuple[str, str]
    base: Literal["uncoded"] = "uncoded"
    L: int = Field(ge=1)
    n: int = Field(ge=1)
    sessions: int = Field(ge=1)
    extra_sessions: int | None = Field(default=None, ge=1)
    delta: float = Field(default=0.05, gt=0, lt=1)
    margin_bits: int = Field(default=8, ge=0)
    calibration_trials: int = Field(default=4000, ge=1)
    candidates: int = Field(default=64, ge=1)
    trials: int = Field(default=1000, ge=1)


class AwgnSweepManifest(_Base):
    scenario: Literal["awgn-sweep"]
    power: float = Field(gt=0)
    noise: float = Field(gt=0)
    grid: list[tuple[int, int]] | None = None
    js: list[int] | None = None
    ks: list[int] | None = None
    tol: float = Field(default=1e-9, gt=0)

    @model_validator(mode="after")
    def _grid(self):
        if self.grid is None and (self.js is None or self.ks is None):
            raise ValueError("give 'grid' or both 'js' and 'ks'")
        if self.grid is not None and (self.js is not None or self.ks is not None):
            raise ValueError("'grid' excludes 'js' and 'ks'")
        cells = self.cells()
        if not cells or min(min(c) for c in cells) < 1:
            raise ValueError("grid indices must be positive and the grid non-empty")
        return self

    def cells(self) -> list[tuple[int, int]]:
        if self.grid is not None:
            return [tuple(c) for c in self.grid]
        return [(j, k) for j in self.js for k in self.ks]


class StackCheckManifest(_Base):
    scenario: Literal["stack-check"]
    network: Union[NetworkCfg, str]
    scheme: Literal["repetition"] = "repetition"
    layers: int = Field(ge=1)
    n: int = Field(ge=1)
    L: int = Field(default=1, ge=1)
    trials: int = Field(default=100, ge=1)
    schedule: Literal["quanta", "end"] = "quanta"
    trace_trials: int = Field(default=2, ge=0)


Manifest = Annotated[
    Union[
        CapacityManifest,
        RdManifest,
        EmulateManifest,
        SeparateManifest,
        PatchManifest,
        AwgnSweepManifest,
        StackCheckManifest,
    ],
    Field(discriminator="scenario"),
]

_ADAPTER = TypeAdapter(Manifest)


def parse_manifest(data: dict):
    try:
        return _ADAPTER.validate_python(data)
    except ValidationError as exc:
        raise InvalidArgument(f"invalid manifest: {exc}") from exc


def load_manifest(path: str | Path):
    """Read and validate a manifest; relative network paths resolve next to it."""
    p = Path(path)
    data = load_structured(p)
    net = data.get("network")
    if isinstance(net, str):
        ref = Path(net)
        data = dict(data, network=str(ref if ref.is_absolute() else p.parent / ref))
    return parse_manifest(data)
