import json
import logging
from typing import Annotated, Any, Dict, List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator

from turan_domains.geometry.ConvexBody import Ball, Box, ConvexBody, HPolytope
from turan_domains.geometry.Lattice import Lattice


class ConfigError(ValueError):

    def __init__(self, message: str, file: str = None, location: str = None) -> None:
        self.file = file
        self.location = location
        prefix = ':'.join(str(part) for part in (file, location) if part)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class BoxConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['box']
    halfwidths: List[float] = Field(min_length=1)

    @field_validator('halfwidths')
    @classmethod
    def positive_halfwidths(cls, v: List[float]) -> List[float]:
        if any(not np.isfinite(w) or w <= 0 for w in v):
            raise ValueError('halfwidths must be positive and finite')
        return v


class BallConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['ball']
    radius: float = Field(gt=0, allow_inf_nan=False)
    dimension: int = Field(default=2, ge=1)


class HPolytopeConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['hpolytope']
    rows: List[List[float]] = Field(min_length=1)

    @field_validator('rows')
    @classmethod
    def consistent_rows(cls, v: List[List[float]]) -> List[List[float]]:
        if len({len(row) for row in v}) != 1 or len(v[0]) < 2:
            raise ValueError('every row needs the same number of entries, at least one normal entry and an offset')
        return v


class LatticeConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['lattice']
    generator: List[List[float]] = Field(min_length=1)

    @field_validator('generator')
    @classmethod
    def square_generator(cls, v: List[List[float]]) -> List[List[float]]:
        if any(len(column) != len(v) for column in v):
            raise ValueError(f'the generator needs {len(v)} columns of length {len(v)}')
        return v


ConfigDocument = Annotated[Union[BoxConfig, BallConfig, HPolytopeConfig, LatticeConfig], Field(discriminator='kind')]
_document_adapter = TypeAdapter(ConfigDocument)


def parse_config(document: Any, file: str = None) -> BaseModel:
    """ Validate a decoded document; errors name the field path """
    try:
        return _document_adapter.validate_python(document)
    except ValidationError as e:
        error = e.errors()[0]
        location = '.'.join(str(part) for part in error['loc']) or 'kind'
        raise ConfigError(error['msg'], file=file, location=location) from None


def load_config(file: str) -> BaseModel:
    """ Read and validate one JSON body or lattice document

    Args:
        - file: str
            path of the JSON document

    Returns:
        - BoxConfig, BallConfig, HPolytopeConfig or LatticeConfig
    """
    try:
        with open(file, 'r') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read the file: {e.strerror}", file=file) from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, file=file, location=f"line {e.lineno} column {e.colno}") from None
    logging.debug(f"Loaded configuration from {file}")
    return parse_config(document, file=file)


def body_from_config(config: Union[BaseModel, Dict], file: str = None) -> ConvexBody:
    if isinstance(config, dict):
        config = parse_config(config, file=file)
    try:
        if isinstance(config, BoxConfig):
            return Box(config.halfwidths)
        if isinstance(config, BallConfig):
            return Ball(config.radius, config.dimension)
        if isinstance(config, HPolytopeConfig):
            return HPolytope.from_rows(config.rows)
    except ValueError as e:
        raise ConfigError(str(e), file=file, location=config.kind) from None
    raise ConfigError(f"expected a body, got kind '{config.kind}'", file=file, location='kind')


def lattice_from_config(config: Union[BaseModel, Dict], file: str = None) -> Lattice:
    if isinstance(config, dict):
        config = parse_config(config, file=file)
    if not isinstance(config, LatticeConfig):
        raise ConfigError(f"expected a lattice, got kind '{config.kind}'", file=file, location='kind')
    try:
        return Lattice(np.array(config.generator, dtype=float).T)
    except ValueError as e:
        raise ConfigError(str(e), file=file, location='generator') from None


def load_body(file: str) -> ConvexBody:
    return body_from_config(load_config(file), file=file)


def load_lattice(file: str) -> Lattice:
    return lattice_from_config(load_config(file), file=file)
