import pytest

from seqaug.config import load_experiment_config
from seqaug.errors import ConfigError

BASE = """\
[dataset]
manifest = "manifest.tsv"

[provider]
store = "store"
"""


def write_config(tmp_path, text=BASE, name="exp.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def load(tmp_path, text=BASE, env=None):
    return load_experiment_config(write_config(tmp_path, text), env=env or {})


def test_minimal_config_fills_defaults(tmp_path):
    cfg = load(tmp_path)
    assert cfg.shots == "full"
    assert cfg.provider_id == "toy-trajectory"
    assert (cfg.m, cfg.k) == (1, 32)
    assert cfg.balancing.alpha == 0.5
    assert cfg.balancing.mode == "epoch-permutation"
    assert cfg.backbone == "cnn-small"
    assert cfg.train.epochs == 128
    assert (cfg.train.t0, cfg.train.t_mult) == (1, 2)
    assert cfg.stage2 is None
    assert cfg.transforms.out_size == 224
    assert cfg.transforms.level == "RRC"
    assert cfg.transforms.scale == (0.5, 1.0)
    assert cfg.method == "SGIA"
    assert cfg.btl is True
    assert cfg.seeds == (0,)


def test_relative_paths_resolve_against_config_dir(tmp_path):
    sub = tmp_path / "configs"
    sub.mkdir()
    cfg = load_experiment_config(write_config(sub), env={})
    assert cfg.manifest_path == (sub / "manifest.tsv").resolve()
    assert cfg.store_root == (sub / "store").resolve()
    assert cfg.output_dir == (sub / "runs").resolve()


def test_manifest_is_required(tmp_path):
    with pytest.raises(ConfigError, match="dataset.manifest"):
        load(tmp_path, '[provider]\nstore = "store"\n')


def test_store_is_required(tmp_path):
    with pytest.raises(ConfigError, match="provider.store"):
        load(tmp_path, '[dataset]\nmanifest = "m.tsv"\n')


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match=r"\[sampler\]"):
        load(tmp_path, BASE + "\n[sampler]\nalpha = 0.5\n")


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="alpah"):
        load(tmp_path, BASE + "\n[balancing]\nalpah = 0.5\n")


def test_missing_file_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_experiment_config(tmp_path / "nope.toml", env={})
    with pytest.raises(ConfigError):
        load(tmp_path, BASE + "\n[balancing\nalpha = 0.5\n")


# -- environment overrides ------------------------------------------------------------


def test_env_overrides_are_typed(tmp_path):
    cfg = load(
        tmp_path,
        env={
            "SGIA_BALANCING_ALPHA": "0.7",
            "SGIA_TRAIN_EPOCHS": "4",
            "SGIA_TRAIN_EVAL_EVERY_EPOCH": "false",
            "SGIA_RUN_METHOD": "GIA",
        },
    )
    assert cfg.balancing.alpha == 0.7
    assert cfg.train.epochs == 4
    assert cfg.train.eval_every_epoch is False
    assert cfg.method == "GIA"


def test_env_bool_words(tmp_path):
    for word in ("1", "true", "YES", "on"):
        assert load(tmp_path, env={"SGIA_RUN_TWO_STEP": word}).two_step is True
    for word in ("0", "false", "No", "OFF"):
        assert load(tmp_path, env={"SGIA_RUN_TWO_STEP": word}).two_step is False
    with pytest.raises(ConfigError, match="boolean"):
        load(tmp_path, env={"SGIA_RUN_TWO_STEP": "maybe"})


def test_env_cannot_override_lists(tmp_path):
    with pytest.raises(ConfigError, match="SGIA_RUN_SEEDS"):
        load(tmp_path, env={"SGIA_RUN_SEEDS": "1,2,3"})
    with pytest.raises(ConfigError, match="SGIA_TRANSFORMS_SCALE"):
        load(tmp_path, env={"SGIA_TRANSFORMS_SCALE": "0.2,1.0"})


def test_env_override_of_untyped_optional_stays_string(tmp_path):
    cfg = load(tmp_path, env={"SGIA_DATASET_NAME": "toy-glyphs"})
    assert cfg.dataset_name == "toy-glyphs"


def test_env_override_takes_precedence_over_file(tmp_path):
    text = BASE + "\n[train]\nepochs = 64\n"
    assert load(tmp_path, text).train.epochs == 64
    assert load(tmp_path, text, env={"SGIA_TRAIN_EPOCHS": "2"}).train.epochs == 2


# -- validation -----------------------------------------------------------------------


def test_invalid_shots(tmp_path):
    with pytest.raises(ConfigError, match="shots"):
        load(tmp_path, BASE + '\n[split]\nshots = "10"\n')


def test_unknown_provider(tmp_path):
    with pytest.raises(ConfigError, match="provider"):
        load(tmp_path, BASE + '\n[provider]\nprovider = "sldm"\nstore = "store"\n')


def test_dump_mode_skips_provider_lookup(tmp_path):
    text = """\
[dataset]
manifest = "m.tsv"

[provider]
provider = "external"
dump = "dump"
store = "store"
"""
    cfg = load(tmp_path, text)
    assert cfg.dump_path == (tmp_path / "dump").resolve()


def test_invalid_mode_level_method(tmp_path):
    with pytest.raises(ConfigError, match="mode"):
        load(tmp_path, BASE + '\n[balancing]\nmode = "shuffled"\n')
    with pytest.raises(ConfigError, match="level"):
        load(tmp_path, BASE + '\n[transforms]\nlevel = "AutoAug"\n')
    with pytest.raises(ConfigError, match="method"):
        load(tmp_path, BASE + '\n[run]\nmethod = "SOTA"\n')


def test_scale_must_be_a_pair(tmp_path):
    with pytest.raises(ConfigError, match="scale"):
        load(tmp_path, BASE + "\n[transforms]\nscale = [0.5]\n")


def test_seeds_must_be_non_empty(tmp_path):
    with pytest.raises(ConfigError, match="seeds"):
        load(tmp_path, BASE + "\n[run]\nseeds = []\n")
    cfg = load(tmp_path, BASE + "\n[run]\nseeds = [3, 1, 4]\n")
    assert cfg.seeds == (3, 1, 4)


def test_stage2_epochs_builds_second_stage(tmp_path):
    cfg = load(tmp_path, BASE + "\n[train]\nepochs = 12\nstage2_epochs = 4\nlr0 = 0.02\n")
    assert cfg.train.epochs == 12
    assert cfg.stage2 is not None
    assert cfg.stage2.epochs == 4
    assert cfg.stage2.lr0 == 0.02
    assert cfg.stage2.t_mult == cfg.train.t_mult


def test_trajectory_ranges_flow_through(tmp_path):
    text = BASE + "\n[provider]\nstore = \"store\"\nrotation_range = 30.0\nscale_range = 0.12\n"
    with pytest.raises(ConfigError):
        # provider table appears twice: TOML itself rejects the duplicate
        load(tmp_path, text)
    text = """\
[dataset]
manifest = "m.tsv"

[provider]
store = "store"
rotation_range = 30.0
scale_range = 0.12
m = 2
k = 8
"""
    cfg = load(tmp_path, text)
    assert cfg.trajectory.rotation_range == 30.0
    assert cfg.trajectory.scale_range == 0.12
    assert (cfg.balancing.m, cfg.balancing.k) == (2, 8)
