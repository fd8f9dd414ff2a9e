import numpy as np
import pytest

from s2oiqa.cli import main
from s2oiqa.formats import (KIND_STATISTIC, load_manifest, read_feature_file,
                            read_model_file)
from s2oiqa.raster import Raster, encode_image
from s2oiqa.regress import svr_predict


@pytest.fixture(scope="module")
def corpus_dir(desk_corpus):
    return desk_corpus.parent


@pytest.fixture(scope="module")
def sample_image(corpus_dir):
    return str(next(corpus_dir.glob("*.png")))


class TestExtractStat:
    def test_writes_249(self, sample_image, tmp_path, capsys):
        out = tmp_path / "f.s2fv"
        assert main(["extract-stat", sample_image, "--out", str(out)]) == 0
        kind, vals, tag = read_feature_file(out)
        assert kind == KIND_STATISTIC and len(vals) == 249
        assert tag == "stat-vp6"

    def test_deterministic_bytes(self, sample_image, tmp_path):
        a, b = tmp_path / "a.s2fv", tmp_path / "b.s2fv"
        main(["extract-stat", sample_image, "--out", str(a)])
        main(["extract-stat", sample_image, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_bad_viewport_count(self, sample_image, tmp_path):
        rc = main(["extract-stat", sample_image, "--viewports", "7",
                   "--out", str(tmp_path / "x")])
        assert rc == 1

    def test_non_equirect_rejected(self, tmp_path):
        img = tmp_path / "sq.png"
        img.write_bytes(encode_image(Raster(np.zeros((64, 64))), "PNG"))
        rc = main(["extract-stat", str(img), "--out", str(tmp_path / "x")])
        assert rc == 2


@pytest.fixture(scope="module")
def model_st(desk_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("models") / "st.s2md"
    rc = main(["train", str(desk_corpus), "--path", "st", "--out", str(out)])
    assert rc == 0
    return out


class TestTrainScore:
    def test_model_predicts_finite(self, model_st, desk_corpus):
        model = read_model_file(model_st)
        from s2oiqa.pipeline import extract_stat_features
        from s2oiqa.raster import load_image
        m = load_manifest(desk_corpus)
        feats = extract_stat_features(load_image(m.resolve(m.entries[0].image_path)), 6)
        assert np.isfinite(svr_predict(model, feats)[0])

    def test_score_w1(self, model_st, sample_image, capsys):
        rc = main(["score", sample_image, "--model-st", str(model_st), "--w", "1.0"])
        assert rc == 0
        out = capsys.readouterr().out
        lines = dict(l.split() for l in out.strip().splitlines())
        assert lines["q_overall"] == lines["q_st"]
        float(lines["q_st"])  # 4-decimal number

    def test_score_missing_model(self, sample_image, tmp_path, capsys):
        rc = main(["score", sample_image, "--model-st", str(tmp_path / "nope.s2md"),
                   "--w", "1.0"])
        assert rc == 2
        assert "nope.s2md" in capsys.readouterr().err

    def test_score_bad_w(self, model_st, sample_image):
        assert main(["score", sample_image, "--model-st", str(model_st),
                     "--w", "1.5"]) == 1

    def test_train_corrupt_manifest(self, tmp_path, capsys):
        bad = tmp_path / "bad.s2m"
        bad.write_text("S2MANIFEST 1\nimg.png\tnot-a-number\ts\tJPEG\n")
        rc = main(["train", str(bad), "--path", "st", "--out", str(tmp_path / "m")])
        assert rc == 2
        assert "line 2" in capsys.readouterr().err


class TestEvaluate:
    def test_deterministic_report_bytes(self, desk_corpus, tmp_path, capsys):
        args = ["evaluate", str(desk_corpus), "--repeats", "1", "--seed", "7",
                "--variants", "St"]
        r1, r2 = tmp_path / "r1.txt", tmp_path / "r2.txt"
        assert main(args + ["--report", str(r1)]) == 0
        assert main(args + ["--report", str(r2)]) == 0
        assert r1.read_bytes() == r2.read_bytes()
        text = r1.read_text()
        assert "srocc=" in text and "plcc=" in text and "rmse=" in text
        capsys.readouterr()

    def test_csv_rows(self, desk_corpus, tmp_path, capsys):
        csv = tmp_path / "per.csv"
        assert main(["evaluate", str(desk_corpus), "--repeats", "2", "--seed", "1",
                     "--variants", "St", "--csv", str(csv),
                     "--report", str(tmp_path / "r.txt")]) == 0
        rows = csv.read_text().strip().splitlines()
        assert rows[0] == "variant,seed,srocc,plcc,rmse"
        assert len(rows) == 3
        capsys.readouterr()


class TestBaselines:
    def test_identical_inf(self, sample_image, capsys):
        assert main(["baselines", sample_image, sample_image]) == 0
        out = capsys.readouterr().out
        for name in ("PSNR", "S-PSNR", "WS-PSNR", "CPP-PSNR"):
            assert f"{name} inf" in out

    def test_distinct_images(self, corpus_dir, capsys):
        imgs = sorted(corpus_dir.glob("src00*.png"))[:2]
        assert main(["baselines", str(imgs[0]), str(imgs[1])]) == 0
        out = capsys.readouterr().out
        vals = [float(l.split()[1]) for l in out.strip().splitlines()]
        assert all(np.isfinite(v) for v in vals)
