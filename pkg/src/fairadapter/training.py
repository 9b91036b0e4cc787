"""The FairAdapter training method: hybrid mixing, the dynamically
re-weighted per-category loss, the classify path, and the two-optimizer
loop.

How one training round works, end to end:

1. For every category, sample one AI-generated and one natural embedding,
   enhance each through the fair adapter (a residual two-layer block), and
   batch the enhanced vector together with raw natural embeddings drawn
   from every *other* category. Each such hybrid batch is scored row by
   row by the fair head, and the mean cross-entropy over both batches is
   that category's loss for the round.
2. The per-category losses are combined into one scalar with dynamic
   weights: a category whose loss rose since the previous round gets
   weight 1 + current/previous (> 2), one whose loss fell gets
   1 - previous/current (<= 0), and the very first round uses weight 1.
   The weights are plain coefficients; no derivative flows through them.
   One Adam step updates the fair adapter and fair head only.
3. The freshly enhanced pair is pushed through the classify adapter (no
   residual) and its head; the classification cross-entropy takes one Adam
   step on the classify adapter and classify head only. Enhancement is
   treated as constant input here, so the two halves of the model never
   share gradients.

Scoring runs the full path: embedding -> fair adapter -> classify adapter
-> classify head -> softmax probability of "AI-generated".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingSet, validate_set
from .nn import (
    SCORE_VIA_CLASSIFY,
    SCORE_VIA_FAIR,
    AdamState,
    ModelParams,
    adam_step,
    adapter_backward,
    adapter_forward,
    head_backward,
    head_forward,
    init_model,
    softmax_ce,
    softmax_ce_grad,
    softmax_probs,
)

VARIANT_FULL = "full"
VARIANT_NO_FAIR_ADAPTER = "no-fair-adapter"
VARIANT_NO_FAIR_LOSS = "no-fair-loss"
VARIANT_NO_CLASSIFY_LOSS = "no-classify-loss"
VARIANTS = (VARIANT_FULL, VARIANT_NO_FAIR_ADAPTER, VARIANT_NO_FAIR_LOSS, VARIANT_NO_CLASSIFY_LOSS)


class DegenerateLambdaError(ValueError):
    """A dynamic weight would divide by a zero loss."""


@dataclass
class HybridBatch:
    """One enhanced anchor vector batched with other-category naturals.

    Row 0 is the anchor (enhanced, carries the anchor label); every further
    row is a raw natural vector from a different category with label 0.
    """

    vectors: np.ndarray  # (rows, dim)
    labels: np.ndarray  # (rows,)
    categories: tuple[str, ...]
    anchor_category: str

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass
class LossState:
    """Previous per-category losses, feeding the dynamic weights."""

    prev_loss: dict[str, float] = field(default_factory=dict)
    round_counter: int = 0


@dataclass
class TrainConfig:
    """Training knobs. The defaults are the method's reference settings:
    40 epochs, learning rate 2e-4, one sample pair per category per round.
    """

    epochs: int = 40
    learning_rate: float = 0.0002
    per_category_pairs_per_round: int = 1
    other_category_samples_per_hybrid: int = 1
    hidden: int | None = None  # None -> dim // 4
    seed: int = 0
    lambda_clamp_nonnegative: bool = False
    flip_falling_lambda: bool = False
    classify_fake_only: bool = False
    threshold: float = 0.5
    variant: str = VARIANT_FULL

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.per_category_pairs_per_round < 1:
            raise ValueError("per_category_pairs_per_round must be >= 1")
        if self.other_category_samples_per_hybrid < 1:
            raise ValueError("other_category_samples_per_hybrid must be >= 1")
        if self.hidden is not None and self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")

    def resolve_hidden(self, dim: int) -> int:
        return self.hidden if self.hidden is not None else max(1, dim // 4)


@dataclass
class HybridPair:
    """One sampled fake/real anchor pair plus the shared other-category rows."""

    raw_fake: np.ndarray
    raw_real: np.ndarray
    others: list[tuple[np.ndarray, str]]
    fake_batch: HybridBatch
    real_batch: HybridBatch


@dataclass
class CategoryRound:
    category: str
    pairs: list[HybridPair]


@dataclass
class RoundRecord:
    round: int
    l_fair: float
    l_c: float
    losses: dict[str, float]
    lambdas: dict[str, float]


@dataclass
class TrainHistory:
    rounds: list[RoundRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rounds)


def enhance(model: ModelParams, x: np.ndarray) -> np.ndarray:
    """Residual enhancement of one embedding through the fair adapter."""
    return adapter_forward(model.fair_adapter, x, residual=True)


def build_hybrid_batch(
    enhanced: np.ndarray,
    label: int,
    anchor_category: str,
    others: list[tuple[np.ndarray, str]],
) -> HybridBatch:
    """Assemble a hybrid batch; every "other" row must come from a different
    category and is labeled natural."""
    for _, cat in others:
        if cat == anchor_category:
            raise ValueError(f"other-category vector has the anchor category {anchor_category!r}")
    vectors = np.vstack([np.asarray(enhanced, dtype=np.float64)] + [np.asarray(v, dtype=np.float64) for v, _ in others]) \
        if others else np.asarray(enhanced, dtype=np.float64).reshape(1, -1)
    labels = np.array([int(label)] + [0] * len(others), dtype=np.int64)
    categories = (anchor_category,) + tuple(cat for _, cat in others)
    return HybridBatch(vectors, labels, categories, anchor_category)


def sample_round(eset: EmbeddingSet, round_seed: int, cfg: TrainConfig) -> list[dict]:
    """Draw the raw vectors for one round, deterministically per seed.

    Returns one dict per category (lexicographic order) with the sampled
    fake/real anchors and the natural other-category rows; no model is
    involved yet.
    """
    cats = eset.categories
    if len(cats) < 2:
        raise ValueError("hybrid mixing needs at least two categories")
    reals = {c: [r.vector for r in eset.records_for(c, label=0)] for c in cats}
    fakes = {c: [r.vector for r in eset.records_for(c, label=1)] for c in cats}
    for c in cats:
        if not reals[c] or not fakes[c]:
            raise ValueError(f"category {c!r} is missing a label; run validate_set first")

    rng = np.random.default_rng(round_seed)
    sampled = []
    for cat in cats:
        pairs = []
        for _ in range(cfg.per_category_pairs_per_round):
            fake = fakes[cat][int(rng.integers(len(fakes[cat])))]
            real = reals[cat][int(rng.integers(len(reals[cat])))]
            others = []
            for other in cats:
                if other == cat:
                    continue
                for _ in range(cfg.other_category_samples_per_hybrid):
                    others.append((reals[other][int(rng.integers(len(reals[other])))], other))
            pairs.append({"fake": fake, "real": real, "others": others})
        sampled.append({"category": cat, "pairs": pairs})
    return sampled


def build_round(model: ModelParams, sampled: list[dict]) -> list[CategoryRound]:
    """Enhance the sampled anchors with the current model and build the
    hybrid batches for every category."""
    rounds = []
    for entry in sampled:
        cat = entry["category"]
        pairs = []
        for p in entry["pairs"]:
            enhanced_fake = enhance(model, p["fake"])
            enhanced_real = enhance(model, p["real"])
            pairs.append(
                HybridPair(
                    raw_fake=p["fake"],
                    raw_real=p["real"],
                    others=p["others"],
                    fake_batch=build_hybrid_batch(enhanced_fake, 1, cat, p["others"]),
                    real_batch=build_hybrid_batch(enhanced_real, 0, cat, p["others"]),
                )
            )
        rounds.append(CategoryRound(category=cat, pairs=pairs))
    return rounds


def category_losses(model: ModelParams, rounds: list[CategoryRound]) -> dict[str, float]:
    """Mean fair-head cross-entropy per category over its hybrid batches.

    Anchor rows are re-enhanced with the current fair adapter, so the same
    sampled round can be re-evaluated after a parameter update.
    """
    losses: dict[str, float] = {}
    for cr in rounds:
        terms = []
        for pair in cr.pairs:
            for raw, batch in ((pair.raw_fake, pair.fake_batch), (pair.raw_real, pair.real_batch)):
                anchor = enhance(model, raw)
                terms.append(softmax_ce(head_forward(model.fair_head, anchor), int(batch.labels[0])))
                for i in range(1, len(batch)):
                    terms.append(
                        softmax_ce(head_forward(model.fair_head, batch.vectors[i]), int(batch.labels[i]))
                    )
        losses[cr.category] = float(np.mean(terms))
    return losses


def round_category_losses(
    model: ModelParams, train_set: EmbeddingSet, round_seed: int, cfg: TrainConfig
) -> tuple[dict[str, float], list[CategoryRound]]:
    """Sample one round and compute the per-category losses with the
    current model. Returns the losses and the sampled batches."""
    sampled = sample_round(train_set, round_seed, cfg)
    rounds = build_round(model, sampled)
    return category_losses(model, rounds), rounds


def lambda_weight(
    current: float,
    previous: float | None,
    clamp: bool = False,
    flip_falling: bool = False,
) -> float:
    """Dynamic weight for one category given its current and previous loss.

    No previous loss -> 1. Rising loss -> 1 + current/previous. Falling or
    equal loss -> 1 - previous/current, which is <= 0; ``flip_falling``
    swaps that ratio to current/previous so the weight stays in [0, 1).
    ``clamp`` floors the result at zero.
    """
    if current < 0:
        raise ValueError("losses must be nonnegative")
    if previous is None:
        lam = 1.0
    else:
        if previous <= 0:
            raise DegenerateLambdaError(f"previous loss must be positive, got {previous}")
        if previous < current:
            lam = 1.0 + current / previous
        elif flip_falling:
            lam = 1.0 - current / previous
        elif current == 0.0:
            if clamp:
                return 0.0
            raise DegenerateLambdaError(
                "current loss is zero with a positive previous loss; the falling branch divides by it"
            )
        else:
            lam = 1.0 - previous / current
    return max(0.0, lam) if clamp else lam


def fair_loss(
    losses: dict[str, float],
    state: LossState,
    clamp: bool = False,
    flip_falling: bool = False,
) -> tuple[float, dict[str, float], LossState]:
    """Weighted mean of the per-category losses plus the updated state.

    The weights are constants with respect to differentiation; the state
    returned stores the current losses as next round's previous losses.
    """
    if not losses:
        raise ValueError("need at least one category loss")
    lambdas = {
        cat: lambda_weight(loss, state.prev_loss.get(cat), clamp, flip_falling)
        for cat, loss in losses.items()
    }
    l_fair = sum(lambdas[c] * losses[c] for c in losses) / len(losses)
    new_state = LossState(prev_loss={c: float(v) for c, v in losses.items()},
                          round_counter=state.round_counter + 1)
    return float(l_fair), lambdas, new_state


def classify_forward(model: ModelParams, enhanced_fake: np.ndarray, enhanced_real: np.ndarray):
    """Push an enhanced pair through the classify adapter (no residual)."""
    cf = adapter_forward(model.classify_adapter, enhanced_fake, residual=False)
    cr = adapter_forward(model.classify_adapter, enhanced_real, residual=False)
    return cf, cr


def classify_loss(
    model: ModelParams,
    pairs: list[tuple[np.ndarray, np.ndarray]],
    fake_only: bool = False,
) -> float:
    """Mean classification cross-entropy over enhanced (fake, real) pairs.

    Both halves of each pair contribute by default; ``fake_only`` restricts
    the loss to the AI-generated half.
    """
    if not pairs:
        raise ValueError("pairs must be nonempty")
    terms = []
    for enhanced_fake, enhanced_real in pairs:
        cf, cr = classify_forward(model, enhanced_fake, enhanced_real)
        loss_fake = softmax_ce(head_forward(model.classify_head, cf), 1)
        if fake_only:
            terms.append(loss_fake)
        else:
            loss_real = softmax_ce(head_forward(model.classify_head, cr), 0)
            terms.append(0.5 * (loss_fake + loss_real))
    return float(np.mean(terms))


def fair_group(model: ModelParams) -> dict[str, np.ndarray]:
    """The parameter arrays updated by the fairness step."""
    out = {f"fair_adapter.{k}": v for k, v in model.fair_adapter.arrays().items()}
    out.update({f"fair_head.{k}": v for k, v in model.fair_head.arrays().items()})
    return out


def classify_group(model: ModelParams) -> dict[str, np.ndarray]:
    """The parameter arrays updated by the classification step."""
    out = {f"classify_adapter.{k}": v for k, v in model.classify_adapter.arrays().items()}
    out.update({f"classify_head.{k}": v for k, v in model.classify_head.arrays().items()})
    return out


def apply_fair_group(model: ModelParams, params: dict[str, np.ndarray]) -> None:
    a, h = model.fair_adapter, model.fair_head
    a.W1, a.b1 = params["fair_adapter.W1"], params["fair_adapter.b1"]
    a.W2, a.b2 = params["fair_adapter.W2"], params["fair_adapter.b2"]
    h.W, h.b = params["fair_head.W"], params["fair_head.b"]


def apply_classify_group(model: ModelParams, params: dict[str, np.ndarray]) -> None:
    a, h = model.classify_adapter, model.classify_head
    a.W1, a.b1 = params["classify_adapter.W1"], params["classify_adapter.b1"]
    a.W2, a.b2 = params["classify_adapter.W2"], params["classify_adapter.b2"]
    h.W, h.b = params["classify_head.W"], params["classify_head.b"]


def fair_loss_gradients(
    model: ModelParams, rounds: list[CategoryRound], lambdas: dict[str, float]
) -> dict[str, np.ndarray]:
    """Exact gradients of the weighted fair loss w.r.t. the fair group.

    Anchor rows backpropagate through both the fair head and the fair
    adapter; other-category rows are raw constants and only reach the head.
    """
    grads = {k: np.zeros_like(v) for k, v in fair_group(model).items()}
    n = len(rounds)
    for cr in rounds:
        lam = lambdas[cr.category]
        total_rows = sum(len(p.fake_batch) + len(p.real_batch) for p in cr.pairs)
        coeff = lam / (n * total_rows)
        for pair in cr.pairs:
            for raw, batch in ((pair.raw_fake, pair.fake_batch), (pair.raw_real, pair.real_batch)):
                anchor = enhance(model, raw)
                d_logits = coeff * softmax_ce_grad(
                    head_forward(model.fair_head, anchor), int(batch.labels[0])
                )
                head_grads, d_anchor = head_backward(model.fair_head, anchor, d_logits)
                grads["fair_head.W"] += head_grads["W"]
                grads["fair_head.b"] += head_grads["b"]
                adapter_grads, _ = adapter_backward(model.fair_adapter, raw, True, d_anchor)
                for k, g in adapter_grads.items():
                    grads[f"fair_adapter.{k}"] += g
                for i in range(1, len(batch)):
                    row = batch.vectors[i]
                    d_logits = coeff * softmax_ce_grad(
                        head_forward(model.fair_head, row), int(batch.labels[i])
                    )
                    head_grads, _ = head_backward(model.fair_head, row, d_logits)
                    grads["fair_head.W"] += head_grads["W"]
                    grads["fair_head.b"] += head_grads["b"]
    return grads


def classify_loss_gradients(
    model: ModelParams,
    pairs: list[tuple[np.ndarray, np.ndarray]],
    fake_only: bool = False,
) -> dict[str, np.ndarray]:
    """Exact gradients of the classification loss w.r.t. the classify group.

    The enhanced inputs are constants here; nothing reaches the fair group.
    """
    if not pairs:
        raise ValueError("pairs must be nonempty")
    grads = {k: np.zeros_like(v) for k, v in classify_group(model).items()}
    for enhanced_fake, enhanced_real in pairs:
        halves = [(enhanced_fake, 1)] if fake_only else [(enhanced_fake, 1), (enhanced_real, 0)]
        weight = 1.0 / len(pairs) if fake_only else 0.5 / len(pairs)
        for vec, label in halves:
            out = adapter_forward(model.classify_adapter, vec, residual=False)
            d_logits = weight * softmax_ce_grad(head_forward(model.classify_head, out), label)
            head_grads, d_out = head_backward(model.classify_head, out, d_logits)
            grads["classify_head.W"] += head_grads["W"]
            grads["classify_head.b"] += head_grads["b"]
            adapter_grads, _ = adapter_backward(model.classify_adapter, vec, False, d_out)
            for k, g in adapter_grads.items():
                grads[f"classify_adapter.{k}"] += g
    return grads


def rounds_per_epoch(train_set: EmbeddingSet, cfg: TrainConfig) -> int:
    """One epoch visits each category's larger label stratum about once."""
    largest = 0
    for cat in train_set.categories:
        n_real = len(train_set.records_for(cat, label=0))
        n_fake = len(train_set.records_for(cat, label=1))
        largest = max(largest, max(n_real, n_fake))
    return max(1, math.ceil(largest / cfg.per_category_pairs_per_round))


def train(
    train_set: EmbeddingSet,
    cfg: TrainConfig,
    round_callback=None,
) -> tuple[ModelParams, TrainHistory]:
    """Run the two-step training loop and return the model plus history.

    ``round_callback(event, round_index, model)`` is invoked with events
    "round-start", "post-fair-step" and "post-classify-step"; useful for
    monitoring and for asserting that the two parameter groups never share
    an update.
    """
    problems = validate_set(train_set, require_both_labels_per_category=True)
    if problems:
        raise ValueError("training set invalid: " + "; ".join(problems))
    if len(train_set.categories) < 2:
        raise ValueError("training needs at least two categories for hybrid mixing")

    dim = train_set.dim
    hidden = cfg.resolve_hidden(dim)
    model = init_model(dim, hidden, scheme="uniform-fan-in", seed=cfg.seed)
    if cfg.variant == VARIANT_NO_FAIR_ADAPTER:
        # zero residual block == identity enhancement, and it stays frozen
        zeroed = init_model(dim, hidden, scheme="zeros", seed=cfg.seed)
        model.fair_adapter = zeroed.fair_adapter
    if cfg.variant == VARIANT_NO_CLASSIFY_LOSS:
        model.score_route = SCORE_VIA_FAIR

    fair_opt = AdamState.for_params(fair_group(model), cfg.learning_rate)
    classify_opt = AdamState.for_params(classify_group(model), cfg.learning_rate)
    state = LossState()
    history = TrainHistory()

    total_rounds = cfg.epochs * rounds_per_epoch(train_set, cfg)
    seed_stream = np.random.default_rng(cfg.seed)
    round_seeds = seed_stream.integers(0, 2**63, size=total_rounds) if total_rounds else []

    for r in range(total_rounds):
        losses, rounds = round_category_losses(model, train_set, int(round_seeds[r]), cfg)
        if cfg.variant == VARIANT_NO_FAIR_LOSS:
            lambdas = {c: 1.0 for c in losses}
            l_fair = float(np.mean(list(losses.values())))
            state = LossState(prev_loss=dict(losses), round_counter=state.round_counter + 1)
        else:
            l_fair, lambdas, state = fair_loss(
                losses, state, cfg.lambda_clamp_nonnegative, cfg.flip_falling_lambda
            )
        if not math.isfinite(l_fair) or not all(math.isfinite(v) for v in losses.values()):
            raise RuntimeError(f"non-finite fairness loss at round {r}: {losses}")

        if round_callback:
            round_callback("round-start", r, model)

        if cfg.variant != VARIANT_NO_FAIR_ADAPTER:
            grads = fair_loss_gradients(model, rounds, lambdas)
            new_params, fair_opt = adam_step(fair_opt, fair_group(model), grads)
            apply_fair_group(model, new_params)
        if round_callback:
            round_callback("post-fair-step", r, model)

        pairs = [
            (enhance(model, p.raw_fake), enhance(model, p.raw_real))
            for cr in rounds
            for p in cr.pairs
        ]
        l_c = classify_loss(model, pairs, cfg.classify_fake_only)
        if not math.isfinite(l_c):
            raise RuntimeError(f"non-finite classification loss at round {r}")
        if cfg.variant != VARIANT_NO_CLASSIFY_LOSS:
            grads = classify_loss_gradients(model, pairs, cfg.classify_fake_only)
            new_params, classify_opt = adam_step(classify_opt, classify_group(model), grads)
            apply_classify_group(model, new_params)
        if round_callback:
            round_callback("post-classify-step", r, model)

        history.rounds.append(RoundRecord(r, l_fair, l_c, losses, lambdas))

    return model, history


def score(model: ModelParams, x: np.ndarray) -> float:
    """Probability in [0, 1] that ``x`` encodes an AI-generated image."""
    enhanced = enhance(model, x)
    if model.score_route == SCORE_VIA_CLASSIFY:
        final = adapter_forward(model.classify_adapter, enhanced, residual=False)
        logits = head_forward(model.classify_head, final)
    else:
        logits = head_forward(model.fair_head, enhanced)
    return float(softmax_probs(logits)[1])


def save_history(history: TrainHistory, path) -> None:
    """One JSON line per round: overall losses plus per-category detail."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in history.rounds:
            obj = {
                "round": rec.round,
                "l_fair": rec.l_fair,
                "l_c": rec.l_c,
                "losses": {c: float(v) for c, v in rec.losses.items()},
                "lambdas": {c: float(v) for c, v in rec.lambdas.items()},
            }
            fh.write(json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n")


def load_history(path) -> TrainHistory:
    history = TrainHistory()
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh.read().splitlines():
            obj = json.loads(raw)
            history.rounds.append(
                RoundRecord(obj["round"], obj["l_fair"], obj["l_c"], obj["losses"], obj["lambdas"])
            )
    return history
