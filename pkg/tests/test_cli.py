import numpy as np
import pytest

from graphssl.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from graphssl.data import save_dataset
from graphssl.graph import load_graph
from graphssl.laplacian import build_laplacian

from helpers import assert_valid_laplacian, nuisance_blobs


@pytest.fixture
def workspace(tmp_path):
    data = tmp_path / "blobs.csv"
    save_dataset(nuisance_blobs(seed=4, n_per_class=12), data)
    config = tmp_path / "exp.cfg"
    config.write_text("algorithm=fgnmf\nk_clusters=3\nlabels_per_class=2\n"
                      "test_runs=3\nknn_k=4\nmax_iters=50\n")
    return tmp_path, data, config


def test_run_writes_csv(workspace):
    tmp, data, config = workspace
    out = tmp / "out.csv"
    assert main(["run", "--data", str(data), "--config", str(config), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "dataset,algorithm,k,labels_per_class,run,seed,ac,status"
    assert lines[1].startswith("blobs,fgnmf,3,2,0,0,")
    assert lines[-2].split(",")[4] == "mean"


def test_graph_command(workspace):
    tmp, data, config = workspace
    out = tmp / "graph.txt"
    assert main(["graph", "--data", str(data), "--config", str(config), "--out", str(out)]) == EXIT_OK
    g = load_graph(out)
    assert g.kind == "learned" and g.n == 36 and g.k == 4
    assert_valid_laplacian(build_laplacian(g))


def test_eval_command(tmp_path, capsys):
    (tmp_path / "p.csv").write_text("1\n1\n0\n0\n2\n")
    (tmp_path / "t.csv").write_text("a\na\nb\nb\nb\n")
    assert main(["eval", "--pred", str(tmp_path / "p.csv"),
                 "--truth", str(tmp_path / "t.csv")]) == EXIT_OK
    assert "ac=0.8" in capsys.readouterr().out


def test_config_error_exit_code(workspace):
    tmp, data, _ = workspace
    bad = tmp / "bad.cfg"
    bad.write_text("algorithm=nope\n")
    code = main(["run", "--data", str(data), "--config", str(bad), "--out", str(tmp / "o")])
    assert code == EXIT_CONFIG
    missing = main(["run", "--data", str(data), "--config", str(tmp / "none.cfg"),
                    "--out", str(tmp / "o")])
    assert missing == EXIT_CONFIG


def test_data_error_exit_code(workspace):
    tmp, _, config = workspace
    bad = tmp / "bad.csv"
    bad.write_text("a,b\n1,nan\n")
    code = main(["run", "--data", str(bad), "--config", str(config), "--out", str(tmp / "o")])
    assert code == EXIT_DATA
    assert main(["eval", "--pred", str(tmp / "nope"), "--truth", str(bad)]) == EXIT_DATA


def test_eval_length_mismatch(tmp_path):
    (tmp_path / "p.csv").write_text("1\n0\n")
    (tmp_path / "t.csv").write_text("a\n")
    assert main(["eval", "--pred", str(tmp_path / "p.csv"),
                 "--truth", str(tmp_path / "t.csv")]) == EXIT_DATA


def test_binary_dataset(tmp_path):
    data = tmp_path / "blobs.npz"
    save_dataset(nuisance_blobs(seed=1, n_per_class=8), data, "dense-binary")
    config = tmp_path / "c.cfg"
    config.write_text("algorithm=kmeans\nk_clusters=2\nlabels_per_class=0\ntest_runs=2\n")
    out = tmp_path / "o.csv"
    assert main(["run", "--data", str(data), "--config", str(config), "--out", str(out)]) == EXIT_OK
    assert len(out.read_text().splitlines()) == 5
    np.testing.assert_equal(out.exists(), True)
