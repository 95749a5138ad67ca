import json
import os

import numpy as np
import pytest

from turan_domains.config import (BoxConfig, ConfigError, LatticeConfig, body_from_config, lattice_from_config,
                                  load_body, load_config, load_lattice, parse_config)
from turan_domains.geometry.ConvexBody import Ball, Box, HPolytope
from turan_domains.geometry.Lattice import Lattice


def _write(tmp_path, name, text):
    file = tmp_path / name
    file.write_text(text)
    return str(file)


@pytest.mark.parametrize('name, kind', [
    ('interval.json', Box),
    ('square.json', Box),
    ('cube_q2.json', Box),
    ('disk.json', Ball),
    ('hexagon.json', HPolytope),
])
def test_shipped_bodies(configs, name, kind):
    assert isinstance(load_body(os.path.join(configs, name)), kind)


def test_shipped_hexagon_matches_the_lattice(configs):
    hexagon = load_body(os.path.join(configs, 'hexagon.json'))
    lat = load_lattice(os.path.join(configs, 'hexagonal_lattice.json'))
    assert hexagon.exact_volume == pytest.approx(lat.determinant, rel=1e-12)
    assert lat.same_point_set(Lattice.hexagonal_tiling(1.0))


def test_lattice_columns(configs):
    lat = load_lattice(os.path.join(configs, 'half_lattice.json'))
    assert np.allclose(lat.generator, 0.5 * np.eye(2))
    lat = lattice_from_config({'kind': 'lattice', 'generator': [[1.0, 0.0], [0.5, 1.0]]})
    assert np.allclose(lat.generator, [[1.0, 0.5], [0.0, 1.0]])
    assert lattice_from_config(lat.to_config()).same_point_set(lat)


def test_parse_config_types():
    assert isinstance(parse_config({'kind': 'box', 'halfwidths': [1.0]}), BoxConfig)
    assert isinstance(parse_config({'kind': 'lattice', 'generator': [[1.0]]}), LatticeConfig)


@pytest.mark.parametrize('document, location', [
    ({'kind': 'box', 'halfwidths': [1.0, -1.0]}, 'box.halfwidths'),
    ({'kind': 'ball', 'radius': 0.0}, 'ball.radius'),
    ({'kind': 'ball', 'radius': 1.0, 'colour': 'red'}, 'ball.colour'),
    ({'kind': 'hpolytope', 'rows': [[1.0, 0.0, 1.0], [0.0, 1.0]]}, 'hpolytope.rows'),
    ({'kind': 'lattice', 'generator': [[1.0, 0.0], [1.0]]}, 'lattice.generator'),
    ({'kind': 'prism'}, 'kind'),
])
def test_invalid_documents_name_the_field(document, location):
    with pytest.raises(ConfigError) as e:
        parse_config(document, file='body.json')
    assert e.value.file == 'body.json'
    assert e.value.location == location
    assert str(e.value).startswith(f'body.json:{location}: ')


def test_json_syntax_error_names_the_line(tmp_path):
    file = _write(tmp_path, 'broken.json', '{\n  "kind": "box",\n  "halfwidths": [1.0,]\n}\n')
    with pytest.raises(ConfigError) as e:
        load_config(file)
    assert e.value.location.startswith('line 3 ')


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as e:
        load_config(str(tmp_path / 'missing.json'))
    assert 'cannot read' in str(e.value)


def test_unbounded_polytope_is_a_config_error(tmp_path):
    file = _write(tmp_path, 'slab.json', json.dumps({'kind': 'hpolytope', 'rows': [[1.0, 0.0, 1.0]]}))
    with pytest.raises(ConfigError) as e:
        load_body(file)
    assert e.value.location == 'hpolytope'


def test_singular_lattice_is_a_config_error():
    with pytest.raises(ConfigError) as e:
        lattice_from_config({'kind': 'lattice', 'generator': [[1.0, 2.0], [2.0, 4.0]]})
    assert e.value.location == 'generator'


def test_kind_mismatch(configs):
    with pytest.raises(ConfigError):
        load_lattice(os.path.join(configs, 'disk.json'))
    with pytest.raises(ConfigError):
        load_body(os.path.join(configs, 'z2.json'))


def test_config_error_is_a_value_error():
    with pytest.raises(ValueError):
        body_from_config({'kind': 'box', 'halfwidths': []})


def test_asymmetric_rows_are_a_config_error(tmp_path):
    rows = [[1.0, 0.0, 1.0], [-1.0, 0.0, 2.0], [0.0, 1.0, 1.0], [0.0, -1.0, 1.0]]
    file = _write(tmp_path, 'shifted.json', json.dumps({'kind': 'hpolytope', 'rows': rows}))
    with pytest.raises(ConfigError) as e:
        load_body(file)
    assert e.value.location == 'hpolytope'
