"""Split evaluation: grouping, schema compatibility, edge cases."""

import numpy as np
import pytest
import torch

from deblurnet import (DataFileError, build_model, evaluate, read_manifest,
                       zero_init_output)

from conftest import build_toy_dataset


@pytest.fixture()
def identity_model():
    return zero_init_output(build_model("shallow"))


class TestEvaluate:
    def test_groups_follow_manifest_tags(self, tiny_manifest, identity_model):
        report = evaluate(identity_model, tiny_manifest, "train")
        cells = report.grouped()
        assert len(report.rows) == 6
        assert sum(c["count"] for c in cells) == 6
        lengths = {c["seq_len"] for c in cells}
        assert lengths == {9, 13}

    def test_self_evaluation_is_perfect(self, tmp_path, identity_model):
        # pointing blur and sharp at the same files turns the identity model
        # into a perfect restorer: SSIM exactly 1 everywhere
        root = tmp_path / "d"
        manifest = build_toy_dataset(root, 3, splits=(1.0, 1.0))
        text = manifest.read_text().replace("/blur/", "/sharp/")
        manifest.write_text(text)
        report = evaluate(identity_model, manifest, "train")
        for cell in report.grouped():
            assert cell["ssim"] == pytest.approx(1.0, abs=1e-7)
            assert cell["psnr"] > 100.0 or cell["psnr"] == float("inf")

    def test_missing_split_rejected(self, tiny_manifest, identity_model):
        with pytest.raises(DataFileError):
            evaluate(identity_model, tiny_manifest, "holdout")

    def test_cells_absent_from_split_warned(self, tmp_path, identity_model):
        # four (L, sigma) tags across the pairs but a val split holding only
        # one pair: three cells have no representatives there
        root = tmp_path / "d"
        manifest = build_toy_dataset(root, 8, lengths=(9, 13), sigmas=(0.0, 3.0),
                                     splits=(0.75, 0.875))
        with pytest.warns(UserWarning, match="cell omitted"):
            report = evaluate(identity_model, manifest, "val")
        assert len(report.rows) == 1

    @pytest.mark.filterwarnings("ignore:no pairs for length")
    def test_save_dir_writes_png_and_pfm(self, tiny_manifest, identity_model, tmp_path):
        out = tmp_path / "restored"
        report = evaluate(identity_model, tiny_manifest, "test", save_dir=out)
        assert len(report.rows) == 1
        pngs = sorted(p.name for p in out.glob("*.png"))
        pfms = sorted(p.name for p in out.glob("*.pfm"))
        assert len(pngs) == len(pfms) == 1
        assert pngs[0].rsplit(".", 1)[0] == pfms[0].rsplit(".", 1)[0]

    @pytest.mark.filterwarnings("ignore:no pairs for length")
    def test_identity_scores_match_direct_metrics(self, tiny_manifest, identity_model):
        # restored == blurred for the identity model, so the report must hold
        # exactly PSNR/SSIM of blur vs sharp (up to the float32 pass)
        from deblurnet import load_pair, psnr, split_records
        records = split_records(read_manifest(tiny_manifest), "test")
        blur, sharp = load_pair(tiny_manifest.parent, records[0])
        report = evaluate(identity_model, tiny_manifest, "test")
        assert report.rows[0]["psnr"] == pytest.approx(psnr(blur, sharp), abs=1e-4)


def test_csv_diffable_against_classical_schema(tiny_manifest, identity_model, tmp_path):
    report = evaluate(identity_model, tiny_manifest, "train")
    p = tmp_path / "report.csv"
    report.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "seq_len,sigma,psnr,ssim"
    for line in lines[1:]:
        parts = line.split(",")
        assert len(parts) == 4
        int(parts[0]); float(parts[1]); float(parts[2]); float(parts[3])
