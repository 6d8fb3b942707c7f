import json

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import random_pair, seeds
from mdpbounds import io as mio
from mdpbounds.errors import ValidationError
from mdpbounds.mdp import Policy


class TestRoundTrip:
    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_mdp_bytes(self, seed):
        mdp, _, _ = random_pair(seed)
        text = mio.dumps_mdp(mdp)
        back = mio.loads_mdp(text)
        assert back == mdp
        assert mio.dumps_mdp(back) == text

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_policy_bytes(self, seed):
        _, pi, _ = random_pair(seed)
        text = mio.dumps_policy(pi)
        assert mio.loads_policy(text) == pi
        assert mio.dumps_policy(mio.loads_policy(text)) == text

    def test_files(self, tmp_path, two_state):
        mdp, pi = two_state
        mio.save_mdp(mdp, tmp_path / "m.json")
        mio.save_policy(pi, tmp_path / "p.json")
        assert mio.load_mdp(tmp_path / "m.json") == mdp
        assert mio.load_policy(tmp_path / "p.json") == pi


class TestErrors:
    def test_syntax_error_location(self):
        with pytest.raises(ValidationError) as exc:
            mio.loads_mdp('{"n_states": 1,\n "n_actions": }', "f.json")
        assert exc.value.location == "f.json:2:15"

    def test_schema_error_path(self):
        doc = {"n_states": 1, "n_actions": 1, "transition": [[[1.0]]], "reward": [["x"]], "initial_dist": [1.0]}
        with pytest.raises(ValidationError) as exc:
            mio.loads_mdp(json.dumps(doc), "f.json")
        assert exc.value.location == "f.json:.reward[0][0]"

    def test_shape_mismatch(self):
        doc = {"n_states": 2, "n_actions": 1, "transition": [[[1.0]]], "reward": [[0.0]], "initial_dist": [1.0]}
        with pytest.raises(ValidationError):
            mio.loads_mdp(json.dumps(doc))

    def test_loader_revalidates(self):
        doc = {"n_states": 1, "n_actions": 1, "transition": [[[0.9]]], "reward": [[0.0]], "initial_dist": [1.0]}
        with pytest.raises(ValidationError):
            mio.loads_mdp(json.dumps(doc))

    def test_bad_policy_rows(self):
        with pytest.raises(ValidationError):
            mio.loads_policy('{"probs": [[0.5, 0.6]]}')

    def test_non_finite_refused(self):
        with pytest.raises(ValueError):
            mio.dumps({"x": float("nan")})


def test_numpy_scalars_are_plain():
    out = json.loads(mio.dumps({"a": np.float64(0.1), "b": np.int64(3), "c": np.bool_(True), "d": np.eye(2)}))
    assert out == {"a": 0.1, "b": 3, "c": True, "d": [[1.0, 0.0], [0.0, 1.0]]}


def test_uniform_policy_serializes_exactly():
    text = mio.dumps_policy(Policy.uniform(1, 3))
    assert "0.3333333333333333" in text
