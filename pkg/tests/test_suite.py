import pytest
from hypothesis import given
from hypothesis import strategies as st

from bbls.functions import ProblemDescriptor
from bbls.suite import (
    DIMENSIONS,
    SuiteConfig,
    TargetSet,
    default_precisions,
    default_targets,
    load_config,
    parse_config_text,
    parse_int_list,
    suite_iter,
)


def test_small_config_count_and_order():
    config = SuiteConfig(dimensions=(20,), function_ids=(1, 2), instances=(1, 2, 3))
    descs = list(suite_iter(config))
    assert len(descs) == len(config) == 6
    assert descs[0] == ProblemDescriptor(1, 20, 1)
    assert descs[3] == ProblemDescriptor(2, 20, 1)
    assert [config.index_of(d) for d in descs] == list(range(6))


def test_full_default_suite():
    config = SuiteConfig()
    assert config.dimensions == DIMENSIONS
    assert len(config) == 2160
    assert sum(1 for _ in suite_iter(config)) == 2160


def test_dimension_is_outermost():
    config = SuiteConfig(dimensions=(20, 40), function_ids=(3, 4), instances=(1, 2))
    dims = [d.dimension for d in suite_iter(config)]
    assert dims == [20] * 4 + [40] * 4


@given(
    st.lists(st.sampled_from(DIMENSIONS), min_size=1, max_size=3, unique=True),
    st.lists(st.integers(1, 24), min_size=1, max_size=5, unique=True),
    st.lists(st.integers(0, 50), min_size=1, max_size=4, unique=True),
)
def test_index_round_trip(dims, fids, insts):
    config = SuiteConfig(dimensions=tuple(dims), function_ids=tuple(fids), instances=tuple(insts))
    for index, d in enumerate(suite_iter(config)):
        assert config.index_of(d) == index
        assert config.descriptor_of(index) == d


def test_config_validation(monkeypatch):
    monkeypatch.delenv("BBLS_TEST_MODE", raising=False)
    with pytest.raises(ValueError):
        SuiteConfig(dimensions=(20, 20))
    with pytest.raises(ValueError):
        SuiteConfig(function_ids=(25,))
    with pytest.raises(ValueError):
        SuiteConfig(dimensions=(8,))
    with pytest.raises(IndexError):
        SuiteConfig().descriptor_of(2160)
    with pytest.raises(KeyError):
        SuiteConfig(dimensions=(20,)).index_of(ProblemDescriptor(1, 40, 1))
    assert len(SuiteConfig(instances=())) == 0
    assert list(suite_iter(SuiteConfig(instances=()))) == []


def test_small_dimensions_in_test_mode(test_mode):
    config = SuiteConfig(dimensions=(4, 20))
    assert config.dimensions == (4, 20)
    with pytest.raises(ValueError):
        SuiteConfig(dimensions=(1,))


def test_default_targets():
    t = default_targets(-12.5)
    assert len(t) == 51
    assert t.targets[0] == -12.5 + 100
    assert t.targets[-1] == -12.5 + 1e-8
    assert all(a > b for a, b in zip(t.targets, t.targets[1:]))
    assert default_precisions()[5] == pytest.approx(10.0)
    with pytest.raises(ValueError):
        TargetSet(0.0, (1.0, 1.0))


def test_parse_int_list():
    assert parse_int_list("1,3,5-7") == (1, 3, 5, 6, 7)
    assert parse_int_list(" 20 , 40 ") == (20, 40)


def test_config_file(tmp_path):
    path = tmp_path / "suite.cfg"
    path.write_text("# small run\ndimensions = 20\nfunctions = 1-3\ninstances=1,2\nbudget_multiplier = 50\n")
    config, budget = load_config(path)
    assert config.dimensions == (20,) and config.function_ids == (1, 2, 3) and config.instances == (1, 2)
    assert budget == 50.0
    with pytest.raises(ValueError):
        parse_config_text("colour = blue")
    with pytest.raises(ValueError):
        parse_config_text("dimensions 20")
