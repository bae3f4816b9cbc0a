"""Acceptance suite: one test per release criterion, each printing a
PASS line with its measured numbers (run with ``pytest -s`` to see them
live). Expected values come from independent oracles: central finite
differences for gradients, chi-square critical values for the sampler,
a hand-annotated corpus for extraction, and planted-structure synthetic
data for the end-to-end protocols.
"""

import io
import json
import subprocess
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from scipy import stats as sps

from svoplaus.conllu import parse_conllu
from svoplaus.embeddings import EmbeddingTable, vectorize, write_vectors
from svoplaus.evaluation import (
    NN_GRID,
    TRANSFORMER_GRID,
    build_fold_plan,
    kfold_cv,
    split_valid_test,
)
from svoplaus.extraction import Triple, extract_corpus
from svoplaus.mlp import MlpParams, TrainConfig, forward_batch, loss_and_gradients, make_trainer, train
from svoplaus.rng import make_rng
from svoplaus.sampling import LabeledExample, NegativeSampler, build_selfsupervised_dataset, write_dataset
from svoplaus.store import TripleStore, merge, save
from svoplaus.synth import make_embeddings, make_gold, make_world, write_corpus

FIXTURES = Path(__file__).parent / "fixtures"


def ok(name: str, detail: str) -> None:
    print(f"ACCEPTANCE {name}: PASS ({detail})")


# --------------------------------------------------------------------------
# Criterion 1: analytic gradients match central finite differences
# (relative error <= 1e-4 on >= 20 random small instances, < 10 s).
# --------------------------------------------------------------------------


def test_gradient_oracle():
    start = time.time()
    rng = make_rng(1001)
    worst = 0.0
    instances = 0
    while instances < 20:
        hidden = int(rng.integers(1, 5))
        dim = int(rng.integers(1, 4))
        n = int(rng.integers(1, 6))
        params = MlpParams(
            w1=rng.normal(0, 1, (hidden, 3 * dim)),
            b1=rng.normal(0, 1, hidden),
            w2=rng.normal(0, 1, hidden),
            b2=float(rng.normal()),
        )
        x = rng.normal(0, 1, (n, 3 * dim))
        y = (rng.random(n) < 0.5).astype(float)
        _, grads = loss_and_gradients(params, x, y)

        def loss_at(p):
            return loss_and_gradients(p, x, y)[0]

        step = 1e-5
        for name in ("w1", "b1", "w2"):
            base = getattr(params, name)
            analytic = getattr(grads, name)
            it = np.nditer(base, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                plus = params.copy()
                getattr(plus, name)[idx] += step
                minus = params.copy()
                getattr(minus, name)[idx] -= step
                numeric = (loss_at(plus) - loss_at(minus)) / (2 * step)
                rel = abs(analytic[idx] - numeric) / max(abs(numeric), 1e-8)
                worst = max(worst, rel)
                assert rel <= 1e-4, f"{name}{idx}: rel err {rel:.2e}"
        plus = params.copy()
        plus.b2 += step
        minus = params.copy()
        minus.b2 -= step
        numeric = (loss_at(plus) - loss_at(minus)) / (2 * step)
        rel = abs(grads.b2 - numeric) / max(abs(numeric), 1e-8)
        worst = max(worst, rel)
        assert rel <= 1e-4
        instances += 1
    elapsed = time.time() - start
    assert elapsed < 10.0, f"gradient check took {elapsed:.1f}s"
    ok("gradient-oracle", f"{instances} instances, worst rel err {worst:.2e}, {elapsed:.1f}s")


# --------------------------------------------------------------------------
# Criterion 2: with rejection disabled, per-slot marginals over 1e6 draws
# from a 5-lemma-per-role store pass chi-square at p=0.01 against the role
# frequencies, and the joint factorizes into the marginals. < 1 min.
# --------------------------------------------------------------------------


def test_sampler_fidelity():
    start = time.time()
    subjects = ["sa", "sb", "sc", "sd", "se"]
    verbs = ["va", "vb", "vc", "vd", "ve"]
    objects = ["oa", "ob", "oc", "od", "oe"]
    counts = {}
    for i in range(5):
        counts[Triple(subjects[i], verbs[i], objects[i])] = i + 1
        counts[Triple(subjects[i], verbs[(i + 1) % 5], objects[(i + 2) % 5])] = 2 * i + 1
    store = TripleStore.from_counts(counts)
    for role in ("subject", "verb", "object"):
        assert len(store.role_freq(role)) == 5

    n_draws = 1_000_000
    sampler = NegativeSampler(store, collision_cap=0)
    triples, _ = sampler.sample(n_draws, make_rng(2002))

    crit_marginal = sps.chi2.ppf(0.99, df=4)
    slot_names = ("subject", "verb", "object")
    details = []
    index_of = {}
    for slot, role in enumerate(slot_names):
        freq = store.role_freq(role)
        lemmas = sorted(freq)
        index_of[slot] = {lemma: i for i, lemma in enumerate(lemmas)}
        total = sum(freq.values())
        observed = Counter(t[slot] for t in triples)
        obs = np.array([observed[l] for l in lemmas], dtype=float)
        exp = np.array([freq[l] / total * n_draws for l in lemmas])
        stat = float(((obs - exp) ** 2 / exp).sum())
        assert stat < crit_marginal, f"{role} marginal chi2 {stat:.1f} >= {crit_marginal:.1f}"
        details.append(f"{role} {stat:.1f}")

    # joint independence: expected cell mass = product of empirical marginals
    joint = np.zeros((5, 5, 5))
    for t in triples:
        joint[index_of[0][t.subject], index_of[1][t.verb], index_of[2][t.object]] += 1
    ms = joint.sum(axis=(1, 2)) / n_draws
    mv = joint.sum(axis=(0, 2)) / n_draws
    mo = joint.sum(axis=(0, 1)) / n_draws
    expected = n_draws * ms[:, None, None] * mv[None, :, None] * mo[None, None, :]
    stat = float(((joint - expected) ** 2 / expected).sum())
    df = (125 - 1) - 3 * (5 - 1)
    crit_joint = sps.chi2.ppf(0.99, df=df)
    assert stat < crit_joint, f"joint chi2 {stat:.1f} >= {crit_joint:.1f}"

    elapsed = time.time() - start
    assert elapsed < 60.0, f"sampler fidelity took {elapsed:.1f}s"
    ok(
        "sampler-fidelity",
        f"marginals {', '.join(details)} < {crit_marginal:.1f}; joint {stat:.1f} < {crit_joint:.1f}; {elapsed:.1f}s",
    )


# --------------------------------------------------------------------------
# Criterion 3: extraction reproduces the hand-annotated oracle multiset
# exactly, and sharded extraction equals single-pass byte for byte.
# --------------------------------------------------------------------------


def test_extraction_oracle(tmp_path):
    with open(FIXTURES / "corpus50.conllu", "rb") as f:
        trees = list(parse_conllu(f))
    assert len(trees) == 50
    result = extract_corpus(iter(trees))

    oracle = Counter()
    with open(FIXTURES / "corpus50_triples.tsv", encoding="utf-8") as f:
        for line in f:
            s, v, o, c = line.rstrip("\n").split("\t")
            oracle[Triple(s, v, o)] += int(c)
    assert Counter(result.store.counts) == oracle, "extracted multiset differs from oracle"

    shard_stores = [
        extract_corpus(iter(trees[:17])).store,
        extract_corpus(iter(trees[17:34])).store,
        extract_corpus(iter(trees[34:])).store,
    ]
    single_path = tmp_path / "single.tsv"
    sharded_path = tmp_path / "sharded.tsv"
    save(result.store, single_path)
    save(merge(*shard_stores), sharded_path)
    assert single_path.read_bytes() == sharded_path.read_bytes()
    ok("extraction-oracle", f"{sum(oracle.values())} occurrences, {len(oracle)} unique, shards byte-identical")


# --------------------------------------------------------------------------
# Criterion 4: supervised protocol. The curated 3,062-triple gold set is not
# distributable with this repository, so per the stated fallback the
# criterion runs on a synthetic gold set labeled by a planted linear rule
# over the embeddings: 10-fold x 20-repeat CV accuracy must be >= 0.90
# (< 30 min on one core).
# --------------------------------------------------------------------------


def test_supervised_cv_synthetic_gold():
    start = time.time()
    world = make_world(n_nouns=360, n_verbs=120, n_classes=6, seed=41)
    table = EmbeddingTable(make_embeddings(world, dim=50, seed=41))
    gold = make_gold(world, table, n=3062, seed=41)
    assert len(gold) == 3062

    cfg = TrainConfig(learning_rate=1e-3, batch_size=32, epochs=6, seed=0, hidden=64)
    trainer = make_trainer(table, cfg)
    result = kfold_cv(gold, trainer, k=10, repeats=20, seed=42, init_mode="fixed", model_seed=7)

    elapsed = time.time() - start
    assert elapsed < 1800.0
    assert result.mean_accuracy >= 0.90, f"CV accuracy {result.mean_accuracy:.4f} < 0.90"
    spread = max(result.repeat_accuracies) - min(result.repeat_accuracies)
    ok(
        "supervised-cv",
        f"mean {result.mean_accuracy:.4f} over 10x20 CV (repeat spread {spread:.4f}), {elapsed:.0f}s",
    )


# --------------------------------------------------------------------------
# Criterion 5: learning from text at reduced scale. On a >= 100k-sentence
# corpus the self-supervised classifier must reach >= 0.70 accuracy on a
# held-out 10^4-example pseudo-disambiguation set, strictly above 0.50.
# --------------------------------------------------------------------------


def test_learning_from_text_sanity():
    start = time.time()
    n_sentences = 110_000
    world = make_world(n_nouns=360, n_verbs=120, n_classes=6, seed=51)
    buf = io.StringIO()
    write_corpus(buf, world, n_sentences=n_sentences, seed=51)
    buf.seek(0)
    result = extract_corpus(parse_conllu(buf))
    assert result.sentences == n_sentences

    # hold out 5k unique attested triples as test positives
    triples = sorted(result.store.counts)
    perm = make_rng(52).permutation(len(triples))
    holdout = {triples[i] for i in perm[:5000]}
    train_store = TripleStore.from_counts(
        {t: c for t, c in result.store.counts.items() if t not in holdout}
    )

    dataset = build_selfsupervised_dataset(train_store, 20_000, seed=53)
    sampler = NegativeSampler(result.store, collision_cap=100)
    neg, flags = sampler.sample(5000, make_rng(54))
    test_set = [LabeledExample(t, 1, "attested") for t in sorted(holdout)]
    test_set += [LabeledExample(t, 0, "sampled", collided=bool(f)) for t, f in zip(neg, flags)]
    assert len(test_set) == 10_000

    table = EmbeddingTable(make_embeddings(world, dim=50, seed=51))
    tr = vectorize(table, dataset)
    te = vectorize(table, test_set)
    cfg = TrainConfig(learning_rate=1e-3, batch_size=64, epochs=3, seed=55, hidden=100)
    fitted = train(tr.x, tr.y, cfg)
    preds = (forward_batch(fitted.params, te.x) >= 0.5).astype(float)
    accuracy = float(np.mean(preds == te.y))

    elapsed = time.time() - start
    assert accuracy >= 0.70, f"pseudo-disambiguation accuracy {accuracy:.4f} < 0.70"
    assert accuracy > 0.50
    ok(
        "learning-from-text",
        f"{n_sentences} sentences -> {result.unique} unique triples; test accuracy {accuracy:.4f}, {elapsed:.0f}s",
    )


# --------------------------------------------------------------------------
# Criterion 6: rerunning every CLI subcommand with identical config and
# inputs produces byte-identical primary outputs; grid cells re-run in
# isolation reproduce their table rows.
# --------------------------------------------------------------------------


def _run_cli(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "svoplaus", *map(str, args)],
        cwd=cwd,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, f"svoplaus {args[0]} failed:\n{proc.stderr}"
    return proc


def _assert_rerun_identical(tmp_path, label, args, outputs):
    out_a = tmp_path / f"{label}_a"
    out_b = tmp_path / f"{label}_b"
    _run_cli([*args, "--out", out_a], tmp_path)
    _run_cli([*args, "--out", out_b], tmp_path)
    for name in outputs:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), f"{label}/{name} differs"
    return out_a


def test_cli_determinism_suite(tmp_path):
    start = time.time()
    world = make_world(n_nouns=40, n_verbs=14, n_classes=4, seed=61)
    corpus = tmp_path / "corpus.conllu"
    write_corpus(corpus, world, n_sentences=300, seed=61)
    vectors = make_embeddings(world, dim=8, seed=61)
    emb = tmp_path / "vectors.txt"
    write_vectors(vectors, emb)
    gold = make_gold(world, EmbeddingTable(vectors), n=60, seed=61)
    gold_path = tmp_path / "gold.tsv"
    write_dataset(gold, gold_path)

    extract_out = _assert_rerun_identical(
        tmp_path,
        "extract",
        ["extract", corpus],
        ["triples.tsv", "extract_stats.txt", "resolved_config.json"],
    )
    store_file = extract_out / "triples.tsv"

    ds_out = _assert_rerun_identical(
        tmp_path,
        "dataset",
        ["build-dataset", "--store", store_file, "--n-positive", 40, "--seed", 9],
        ["dataset.tsv", "dataset_stats.txt", "resolved_config.json"],
    )
    dataset = ds_out / "dataset.tsv"

    train_out = _assert_rerun_identical(
        tmp_path,
        "train",
        ["train", "--dataset", dataset, "--embeddings", emb, "--epochs", 2, "--hidden", 8, "--seed", 3],
        ["model.ckpt", "loss_curve.csv", "train_stats.txt", "resolved_config.json"],
    )

    _assert_rerun_identical(
        tmp_path,
        "eval",
        ["eval", "--model", train_out / "model.ckpt", "--dataset", dataset, "--embeddings", emb],
        ["report.txt", "resolved_config.json"],
    )

    _assert_rerun_identical(
        tmp_path,
        "cv",
        ["cv", "--gold", gold_path, "--embeddings", emb, "--k", 4, "--repeats", 2, "--epochs", 2, "--hidden", 8],
        ["cv_report.txt", "cv_repeats.csv", "resolved_config.json"],
    )

    config = tmp_path / "grid_config.json"
    config.write_text(
        json.dumps(
            {
                "seed": 17,
                "grid": {
                    "grid": "custom",
                    "learning_rates": [1e-2, 1e-3],
                    "batch_sizes": [16],
                    "epochs_axis": [1.0],
                    "hidden": 8,
                },
            }
        )
    )
    grid_args = [
        "grid", "--config", config,
        "--train-data", dataset, "--valid-data", gold_path, "--test-data", gold_path,
        "--embeddings", emb,
    ]
    grid_out = _assert_rerun_identical(
        tmp_path, "grid", grid_args, ["grid.csv", "best_config.json", "report.txt", "resolved_config.json"]
    )

    # single cells re-run in isolation must reproduce their table rows
    grid_rows = (grid_out / "grid.csv").read_text().splitlines()
    for cell in (0, 1):
        cell_out = tmp_path / f"cell_{cell}"
        _run_cli(
            ["grid", "--config", config, "--train-data", dataset, "--valid-data", gold_path,
             "--embeddings", emb, "--cell", cell, "--out", cell_out],
            tmp_path,
        )
        cell_rows = (cell_out / "grid.csv").read_text().splitlines()
        assert cell_rows[1] == grid_rows[1 + cell], f"cell {cell} row differs in isolation"

    # topk writes data to stdout; identical across reruns
    run_a = _run_cli(["topk", "--store", store_file, "--k", 5], tmp_path)
    run_b = _run_cli(["topk", "--store", store_file, "--k", 5], tmp_path)
    assert run_a.stdout == run_b.stdout and run_a.stdout

    elapsed = time.time() - start
    ok("cli-determinism", f"7 subcommands byte-identical on rerun, grid cells isolated, {elapsed:.0f}s")


# --------------------------------------------------------------------------
# Criterion 7: protocol arithmetic. Fold plan for 3,062 examples gives
# eight folds of 306 and two of 307; the valid/test split gives 1,531 each;
# the NN grid has 48 cells and the transformer grid 18.
# --------------------------------------------------------------------------


def test_protocol_arithmetic():
    plan = build_fold_plan(3062, k=10, repeats=20, seed=0)
    for repeat in range(20):
        assert sorted(plan.fold_sizes(repeat)) == [306] * 8 + [307] * 2

    gold = [
        LabeledExample(Triple("s", "v", "o"), i % 2, "gold") for i in range(3062)
    ]
    valid, test = split_valid_test(gold, seed=0)
    assert len(valid) == 1531 and len(test) == 1531

    assert len(NN_GRID) == 48
    assert len(TRANSFORMER_GRID) == 18
    ok("protocol-arithmetic", "folds 8x306+2x307, split 1531+1531, grids 48 and 18")
