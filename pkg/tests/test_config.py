import numpy as np
import pytest

from convexp.config import ConfigError, build_run, load_kernel_source, load_run_config, parse_run_config
from convexp.field import save_field
from convexp.rnn import MODRELU

BASIC = """\
# conservation run
[grid]
shape = 8x8
[kernel]
source = random-antihermitian
seed = 3
t = 0.5          # step size
[network]
model = curnn
activation = identity
steps = 20
[output]
norms = out/trace.csv
"""


def test_parse_basic(tmp_path):
    (tmp_path / "out").mkdir()
    cfg = parse_run_config(BASIC, tmp_path)
    assert cfg.get("grid", "shape") == (8, 8)
    assert cfg.get("kernel", "t") == 0.5
    assert cfg.get("output", "norms") == (tmp_path / "out" / "trace.csv").resolve()
    plan = build_run(cfg)
    assert plan.steps == 20 and plan.recurrence.t == 0.5
    assert plan.initial.z.shape == (8, 8)


@pytest.mark.parametrize(
    "text, line, match",
    [
        ("[grid]\nshape = 4\n[nope]\n", 3, "unknown section"),
        ("[grid]\nshape = 4\ncolour = red\n", 3, "unknown key"),
        ("[grid]\nshape = 4\nshape = 5\n", 3, "duplicate"),
        ("shape = 4\n", 1, "outside"),
        ("[grid]\nshape = 4x\n[network]\nsteps = many\n", 4, "many"),
        ("[grid]\n\n\nshape 4\n", 4, "cannot parse"),
        ("[grid]\nshape = 4\n[initial]\nfile = missing.cfld\n", 4, "not found"),
        ("[grid]\nshape = 4\n[output]\nnorms = nodir/x.csv\n", 4, "directory"),
        ("[grid]\nshape = 4\n[kernel]\nsource = nowhere.txt\n", 4, "not found"),
        ("[network]\nrequire_unitary = maybe\n", 2, "boolean"),
    ],
)
def test_errors_carry_line_numbers(tmp_path, text, line, match):
    with pytest.raises(ConfigError, match=match) as info:
        parse_run_config(text, tmp_path)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_missing_required(tmp_path):
    with pytest.raises(ConfigError, match="shape"):
        build_run(parse_run_config("[kernel]\nsource = zero\n", tmp_path))


def test_unknown_model_is_config_error(tmp_path):
    cfg = parse_run_config("[grid]\nshape = 4\n[kernel]\nsource = zero\n[network]\nmodel = lstm\n", tmp_path)
    with pytest.raises(ConfigError, match="lstm"):
        build_run(cfg)


def test_negative_steps(tmp_path):
    cfg = parse_run_config("[grid]\nshape = 4\n[kernel]\nsource = zero\n[network]\nsteps = -2\n", tmp_path)
    with pytest.raises(ConfigError, match="steps") as info:
        build_run(cfg)
    assert info.value.line == 6


def test_default_activations(tmp_path):
    base = "[grid]\nshape = 4\n[kernel]\nsource = zero\n[network]\nmodel = {}\n"
    assert build_run(parse_run_config(base.format("curnn"), tmp_path)).recurrence.phi == MODRELU
    assert build_run(parse_run_config(base.format("cornn"), tmp_path)).recurrence.phi.name == "identity"


def test_kernel_sources(tmp_path):
    core = tmp_path / "k.txt"
    core.write_text("# shift\n1: 0.5 0\n-1: -0.5 0\n")
    K = load_kernel_source(str(core), (6,))
    assert K[1] == 0.5 and K[5] == -0.5
    save_field(tmp_path / "k.cfld", K)
    np.testing.assert_array_equal(load_kernel_source(str(tmp_path / "k.cfld"), (6,)), K)
    with pytest.raises(ValueError, match="shape"):
        load_kernel_source(str(tmp_path / "k.cfld"), (7,))
    assert load_kernel_source("laplacian", (5,))[0] == -2


def test_initial_modes(tmp_path):
    save_field(tmp_path / "z.cfld", np.arange(4.0))
    save_field(tmp_path / "xp.cfld", np.stack([np.ones(4), np.zeros(4)]))
    head = "[grid]\nshape = 4\n[kernel]\nsource = zero\n"
    plan = build_run(parse_run_config(head + "[initial]\nmode = file\nfile = z.cfld\n", tmp_path))
    np.testing.assert_array_equal(plan.initial.z, np.arange(4.0))
    plan = build_run(parse_run_config(head + "[network]\nmodel = cornn\n[initial]\nmode = file\nfile = xp.cfld\n", tmp_path))
    np.testing.assert_array_equal(plan.initial.x, 1.0)
    with pytest.raises(ConfigError, match="coRNN"):
        build_run(parse_run_config(head + "[network]\nmodel = cornn\n[initial]\nmode = file\nfile = z.cfld\n", tmp_path))
    plan = build_run(parse_run_config(head + "[initial]\nmode = delta\n", tmp_path))
    assert plan.initial.z[0] == 1 and plan.initial.norm() == 1
    with pytest.raises(ConfigError, match="blob"):
        build_run(parse_run_config(head + "[initial]\nmode = blob\n", tmp_path))


def test_load_resolves_against_file_dir(tmp_path):
    sub = tmp_path / "cfg"
    sub.mkdir()
    save_field(sub / "k.cfld", np.zeros(4))
    (sub / "run.ini").write_text("[grid]\nshape = 4\n[kernel]\nsource = k.cfld\n")
    assert load_run_config(sub / "run.ini").get("kernel", "source") == (sub / "k.cfld").resolve()
