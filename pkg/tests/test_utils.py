import pytest

from slisemapper.utils import derive_seeds, env, load_dotenv, parallel_map, validate_param


def test_load_dotenv_keeps_existing_values(tmp_path, monkeypatch):
    path = tmp_path / ".env"
    path.write_text(
        "# comment\n"
        "SLISEMAP_RADIUS=2.5\n"
        "export SLISEMAP_SEED='7'\n"
        "SLISEMAP_LASSO=\"0.01\"\n"
        "not a pair\n"
        "SLISEMAP_FAMILY=classification\n",
        encoding="utf-8",
    )
    for key in ("SLISEMAP_RADIUS", "SLISEMAP_SEED", "SLISEMAP_LASSO"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("SLISEMAP_FAMILY", "regression")

    loaded = load_dotenv(str(path))
    assert loaded == ["SLISEMAP_RADIUS", "SLISEMAP_SEED", "SLISEMAP_LASSO"]
    assert env("RADIUS", "3.5") == "2.5"
    assert env("SEED", "42") == "7"
    assert env("LASSO", "0") == "0.01"
    assert env("FAMILY", "x") == "regression"
    assert load_dotenv(str(tmp_path / "missing.env")) == []


def test_validate_param_bounds():
    validate_param("r", None, min_val=0.0)
    validate_param("r", 0.0, min_val=0.0)
    validate_param("p", 1.0, min_val=0.0, max_val=1.0)
    with pytest.raises(ValueError, match="r must be > 0.0"):
        validate_param("r", 0.0, min_val=0.0, min_exclusive=True)
    with pytest.raises(ValueError, match="k must be >= 1"):
        validate_param("k", 0, min_val=1)
    with pytest.raises(ValueError, match="<= 1.0"):
        validate_param("p", 1.5, max_val=1.0)
    with pytest.raises(ValueError, match="finite"):
        validate_param("x", float("nan"), min_val=0.0)


def test_derive_seeds_is_prefix_stable():
    assert derive_seeds(3, 5)[:2] == derive_seeds(3, 2)
    assert len(set(derive_seeds(3, 5))) == 5
    assert derive_seeds(3, 2) != derive_seeds(4, 2)


def test_parallel_map_keeps_order():
    items = list(range(20))
    assert parallel_map(lambda x: x * x, items, threads=4) == [x * x for x in items]
    assert parallel_map(str, [], threads=4) == []
