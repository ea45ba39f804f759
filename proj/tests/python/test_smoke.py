# Copyright 2026 The xdevmatch Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import xdevmatch as xdm


def small_config():
    cfg = xdm.Config()
    cfg.synth.n_personas = 60
    cfg.synth.events_min = cfg.synth.events_max = 60
    p = cfg.pipeline
    p.tfidf_min_count = 2
    p.embed.dim = 16
    p.embed.epochs = 4
    p.embed.min_count = 2
    p.k = 8
    p.recall_ks = [1, 8]
    p.scorer.n_trees = 20
    p.scorer.min_leaf = 5
    p.voter.n_trees = 10
    p.voter.min_leaf = 5
    p.force_deterministic()
    return cfg


def test_f1_and_submission_scoring():
    assert xdm.f1_score(0.3986, 0.4445) == pytest.approx(0.4204, abs=1e-4)
    r = xdm.score_submission([("a", "b"), ("c", "d")], [("b", "a")], k=2)
    assert r["precision"] == 0.5
    assert r["recall"] == 1.0
    assert r["f1"] == pytest.approx(2 / 3)
    assert xdm.score_submission([("a", "b")], [("a", "b"), ("c", "d")])["clamped"] is True
    assert xdm.score_submission([("a", "b")], [("b", "a")])["clamped"] is False


def test_tokens_kl_and_knn():
    assert [xdm.token_at_level("a/b/c", h) for h in range(3)] == ["a", "a/b", "a/b/c"]
    assert xdm.symmetric_kl([2, 2], [1, 3]) == pytest.approx(0.2746, abs=5e-4)
    nn = xdm.knn({"A": [1.0, 0.0], "B": [0.9, 0.1], "C": [0.0, 1.0]}, 1)
    assert nn["A"][0][0] == "B"
    assert -1.0 <= nn["C"][0][1] <= 1.0


def test_merge_inference_modes():
    scored = [("a", "b", 0.9), ("c", "d", 0.8), ("b", "c", 0.7)]
    assert len(xdm.merge_inference(scored, "blind")) == 6
    assert xdm.merge_inference(scored, "unsupervised", beta=3) == [("a", "b"), ("c", "d")]
    with pytest.raises(xdm.XdmError):
        xdm.merge_inference(scored, "psychic")


def test_gbdt_round_trip():
    rows = [[float(i % 2), float(i % 3)] for i in range(100)]
    labels = [i % 2 for i in range(100)]
    params = xdm.GbdtParams()
    params.n_trees = 10
    clf = xdm.train_gbdt(rows, labels, ["x", "y"], params)
    scores = clf.predict(rows)
    assert xdm.roc_auc(scores, labels) == 1.0
    losses = clf.round_logloss
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    imp = clf.importance()
    assert max(imp, key=imp.get) == "x"
    with pytest.raises(xdm.XdmError):
        xdm.train_gbdt(rows, [1] * 100, ["x", "y"], params)


def test_config_text_round_trip():
    cfg = xdm.parse_config("[knn]\nk = 7\n[synth]\nn_personas = 9\n")
    assert cfg.pipeline.k == 7 and cfg.synth.n_personas == 9
    again = xdm.parse_config(cfg.to_ini())
    assert again.to_ini() == cfg.to_ini()
    with pytest.raises(xdm.XdmError):
        xdm.parse_config("[knn]\nbogus = 1\n")


def test_dataset_and_pipeline(tmp_path):
    cfg = small_config()
    data = xdm.generate_dataset(cfg.synth)
    assert len(data.users) == len(set(data.users))
    assert data.event_count() == 60 * len(data.users)
    for a, b in data.truth:
        assert data.persona_of[a] == data.persona_of[b]
    data.write(str(tmp_path / "data"), cfg.synth)
    loaded = xdm.load_dataset(
        str(tmp_path / "data" / "events.tsv"),
        str(tmp_path / "data" / "truth.csv"),
        str(tmp_path / "data" / "splits.tsv"),
    )
    assert sorted(loaded.users) == sorted(data.users)

    out = xdm.run_pipeline(data, cfg.pipeline, str(tmp_path / "run"))
    assert (tmp_path / "run" / "submission.csv").exists()
    report = out["report"]
    assert 0.0 < report["f1"] <= 1.0
    assert set(out["ablations"]) == {"no_inference", "supervised_only", "unsupervised_only", "both"}
    assert set(out["baselines"]) == {"tfidf_knn", "doc2vec_knn"}
    assert len(out["submission"]) == len(set(out["submission"]))
    assert math.isfinite(out["heldout_auc"])
    again = xdm.run_pipeline(data, cfg.pipeline)
    assert again["submission"] == out["submission"]
