"""Declarative network descriptions (YAML or JSON) and their validation.

Example::

    name: fig2
    nodes: ["1", "2", "3"]
    edges:
      - {id: e1, from: "1", to: "3", channel: {type: bsc, crossover: 0.1}}
      - {id: e2, from: "2", to: "3", channel: {type: bsc, crossover: 0.1}}
    source:
      nodes: ["1", "2"]
      family: {type: dsbs, rho: 0.1}
    demands:
      - {source: "1", sink: "3", measure: hamming, lossless: true}
      - {source: "2", sink: "3", measure: hamming, lossless: true}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..channels import AwgnSpec, Dmc, bec, bsc, identity_channel, symmetric_channel
from ..coding_theorems import DistortionMeasure
from ..errors import InvalidArgument
from .model import AwgnLink, BitPipe, Demand, Edge, NetworkSpec, SourceLaw


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BscCfg(_Strict):
    type: Literal["bsc"]
    crossover: float = Field(ge=0, le=1)


class BecCfg(_Strict):
    type: Literal["bec"]
    erasure: float = Field(ge=0, le=1)


class IdentityCfg(_Strict):
    type: Literal["identity"]
    size: int = Field(default=2, ge=1)


class SymmetricCfg(_Strict):
    type: Literal["symmetric"]
    size: int = Field(ge=2)
    error: float = Field(ge=0, le=1)


class MatrixCfg(_Strict):
    type: Literal["dmc"]
    transitions: list[list[float]]
    input_cost: list[float] | None = None


class AwgnCfg(_Strict):
    type: Literal["awgn"]
    power: float = Field(gt=0)
    noise: float = Field(gt=0)
    j: int | None = Field(default=None, ge=1)
    k: int | None = Field(default=None, ge=1)


class PipeCfg(_Strict):
    type: Literal["pipe"]
    capacity: float = Field(ge=0)


ChannelCfg = Annotated[
    Union[BscCfg, BecCfg, IdentityCfg, SymmetricCfg, MatrixCfg, AwgnCfg, PipeCfg],
    Field(discriminator="type"),
]


class EdgeCfg(_Strict):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    id: str
    tail: str = Field(alias="from")
    head: str = Field(alias="to")
    channel: ChannelCfg


class DsbsCfg(_Strict):
    type: Literal["dsbs"]
    rho: float = Field(ge=0, le=1)


class BernoulliCfg(_Strict):
    type: Literal["bernoulli"]
    p: float = Field(ge=0, le=1)


class UniformCfg(_Strict):
    type: Literal["uniform"]
    size: int = Field(ge=1)


class SourceCfg(_Strict):
    nodes: list[str]
    pmf: list | None = None
    family: Annotated[Union[DsbsCfg, BernoulliCfg, UniformCfg], Field(discriminator="type")] | None = None


class MeasureCfg(_Strict):
    table: list[list[float]]
    faithful: bool = False


class DemandCfg(_Strict):
    source: str
    sink: str
    measure: Union[Literal["hamming"], MeasureCfg] = "hamming"
    target: float | None = Field(default=None, ge=0)
    lossless: bool = False


class NetworkCfg(_Strict):
    name: str = "network"
    nodes: list[str]
    edges: list[EdgeCfg] = []
    source: SourceCfg
    demands: list[DemandCfg] = []


def channel_from_config(c) -> Dmc | AwgnLink | BitPipe:
    if isinstance(c, BscCfg):
        return bsc(c.crossover)
    if isinstance(c, BecCfg):
        return bec(c.erasure)
    if isinstance(c, IdentityCfg):
        return identity_channel(c.size)
    if isinstance(c, SymmetricCfg):
        return symmetric_channel(c.size, c.error)
    if isinstance(c, MatrixCfg):
        return Dmc(np.array(c.transitions), input_cost=None if c.input_cost is None else np.array(c.input_cost))
    if isinstance(c, AwgnCfg):
        return AwgnLink(AwgnSpec(c.power, c.noise), c.j, c.k)
    return BitPipe(c.capacity)


def _source_probs(s: SourceCfg) -> np.ndarray:
    if (s.pmf is None) == (s.family is None):
        raise InvalidArgument("source needs exactly one of 'pmf' or 'family'")
    if s.pmf is not None:
        return np.array(s.pmf, dtype=float)
    f = s.family
    if isinstance(f, DsbsCfg):
        if len(s.nodes) != 2:
            raise InvalidArgument("a DSBS source needs exactly two nodes")
        return np.array([[1 - f.rho, f.rho], [f.rho, 1 - f.rho]]) / 2
    single = np.array([1 - f.p, f.p]) if isinstance(f, BernoulliCfg) else np.full(f.size, 1.0 / f.size)
    if len(s.nodes) == 1:
        return single
    # independent copies at every listed node
    out = single
    for _ in s.nodes[1:]:
        out = np.multiply.outer(out, single)
    return out


def network_from_config(cfg: NetworkCfg | dict) -> NetworkSpec:
    """Build a validated ``NetworkSpec``; any schema error becomes ``InvalidArgument``."""
    try:
        c = cfg if isinstance(cfg, NetworkCfg) else NetworkCfg.model_validate(cfg)
    except ValidationError as exc:
        raise InvalidArgument(f"invalid network config: {exc}") from exc
    src = SourceLaw(tuple(c.source.nodes), _source_probs(c.source))
    demands = []
    for d in c.demands:
        if d.measure == "hamming":
            measure = DistortionMeasure.hamming(src.alphabet_size(d.source))
        else:
            measure = DistortionMeasure(np.array(d.measure.table), faithful=d.measure.faithful)
        demands.append(Demand(d.source, d.sink, measure, d.target, d.lossless))
    edges = [Edge(e.id, e.tail, e.head, channel_from_config(e.channel)) for e in c.edges]
    return NetworkSpec(tuple(c.nodes), tuple(edges), src, tuple(demands), c.name)


def load_structured(path: str | Path) -> dict:
    """Read a JSON or YAML mapping from ``path``."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InvalidArgument(f"cannot read {p}: {exc}") from exc
    try:
        data = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise InvalidArgument(f"cannot parse {p}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidArgument(f"{p} must hold a mapping at top level")
    return data


def load_network(path: str | Path) -> NetworkSpec:
    return network_from_config(load_structured(path))
