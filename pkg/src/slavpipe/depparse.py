"""Dependency-tree validation and a greedy arc-standard transition parser.

Two tree schemas are supported.  ``UD`` requires exactly one token attached
to the artificial root 0; ``JOS`` allows several.  The same transition
system serves both: attaching to the root is a right-arc with the root at
the second stack position, which a UD model only permits as the final
transition while a JOS model may take it repeatedly.

Scoring is an averaged perceptron over sparse indicator features of the
stack/buffer context.  Training is deterministic for a fixed seed, and the
decoder chooses among equal scores by lexicographic action order, so parsing
is reproducible as well.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from . import modelio
from .conllu import Document, Sentence, copy_document
from .errors import ModelError, StageError, TrainingError

ROOT = 0
_NONE = "<none>"


class TreeSchema(enum.Enum):
    UD = "ud"
    JOS = "jos"

    @property
    def allows_multiple_roots(self) -> bool:
        return self is TreeSchema.JOS


def validate_tree(sentence: Sentence, schema: TreeSchema) -> list[str]:
    """Check that heads and labels form a tree of the requested schema.

    Returns human-readable violations; an empty list means the sentence is a
    single connected acyclic structure hanging off node 0 with a root count
    matching the schema.
    """
    problems: list[str] = []
    singles = sentence.single_tokens()
    ids = {t.id for t in singles}
    heads: dict[int, int] = {}
    for tok in singles:
        if tok.head is None or tok.deprel is None:
            problems.append(f"token {tok.id} ({tok.form!r}) has no head/deprel")
            continue
        if tok.head != ROOT and tok.head not in ids:
            problems.append(
                f"token {tok.id} ({tok.form!r}) points at nonexistent head {tok.head}"
            )
            continue
        if tok.head == tok.id:
            problems.append(f"token {tok.id} ({tok.form!r}) is its own head")
            continue
        heads[tok.id] = tok.head
    if problems:
        return problems

    roots = [i for i, h in heads.items() if h == ROOT]
    if schema.allows_multiple_roots:
        if not roots:
            problems.append("no token attaches to the root")
    elif len(roots) != 1:
        problems.append(f"expected exactly one root attachment, found {len(roots)}")

    for start in heads:
        seen = set()
        node = start
        while node != ROOT:
            if node in seen:
                cycle = sorted(seen)
                problems.append(f"head cycle through tokens {cycle}")
                return problems
            seen.add(node)
            node = heads[node]
    return problems


# --- model -----------------------------------------------------------------


@dataclass
class ParserMetadata:
    language: str = ""
    variety: str = "standard"
    sentence_count: int = 0
    seed: int = 0
    epochs: int = 0


@dataclass
class ParserModel:
    weights: dict[str, dict[str, float]] = field(default_factory=dict)
    dep_labels: list[str] = field(default_factory=list)
    root_labels: list[str] = field(default_factory=list)
    schema: TreeSchema = TreeSchema.UD
    metadata: ParserMetadata = field(default_factory=ParserMetadata)


def _token_view(sentence: Sentence) -> dict[int, tuple[str, str, str]]:
    view = {ROOT: ("<root>", "<root>", "<root>")}
    for tok in sentence.single_tokens():
        view[tok.id] = (tok.form, tok.upos or _NONE, tok.xpos or _NONE)
    return view


def _features(
    stack: list[int], pos: int, order: list[int], view: dict[int, tuple[str, str, str]]
) -> list[str]:
    def at(idx: int | None) -> tuple[str, str, str]:
        if idx is None:
            return (_NONE, _NONE, _NONE)
        return view[idx]

    s0 = at(stack[-1] if stack else None)
    s1 = at(stack[-2] if len(stack) >= 2 else None)
    b0 = at(order[pos] if pos < len(order) else None)
    b1 = at(order[pos + 1] if pos + 1 < len(order) else None)
    return [
        "bias",
        f"s0f={s0[0]}",
        f"s0u={s0[1]}",
        f"s0x={s0[2]}",
        f"s1f={s1[0]}",
        f"s1u={s1[1]}",
        f"s1x={s1[2]}",
        f"b0f={b0[0]}",
        f"b0u={b0[1]}",
        f"b1u={b1[1]}",
        f"s0u|s1u={s0[1]}|{s1[1]}",
        f"s0x|s1x={s0[2]}|{s1[2]}",
        f"s0u|b0u={s0[1]}|{b0[1]}",
        f"s1u|b0u={s1[1]}|{b0[1]}",
        f"s0f|s1u={s0[0]}|{s1[1]}",
        f"s0u|s1f={s0[1]}|{s1[0]}",
    ]


def _valid_actions(
    stack: list[int],
    pos: int,
    n: int,
    dep_labels: list[str],
    root_labels: list[str],
    schema: TreeSchema,
) -> list[str]:
    actions: list[str] = []
    if pos < n:
        actions.append("shift")
    if len(stack) >= 2:
        s1, s2 = stack[-1], stack[-2]
        if s2 != ROOT:
            actions.extend(f"left={lab}" for lab in dep_labels)
            actions.extend(f"right={lab}" for lab in dep_labels)
        elif schema.allows_multiple_roots or pos >= n:
            actions.extend(f"right={lab}" for lab in root_labels)
    return sorted(actions)


def _apply(action: str, stack: list[int], heads: dict[int, int], labels: dict[int, str]) -> int:
    """Apply an action; returns 1 when a buffer token was consumed."""
    if action == "shift":
        return 1
    kind, _, label = action.partition("=")
    if kind == "left":
        dep = stack.pop(-2)
        heads[dep] = stack[-1]
    else:
        dep = stack.pop()
        heads[dep] = stack[-1]
    labels[dep] = label
    return 0


class _AveragedPerceptron:
    def __init__(self) -> None:
        self.weights: dict[str, dict[str, float]] = {}
        self._totals: dict[tuple[str, str], float] = {}
        self._stamps: dict[tuple[str, str], int] = {}
        self.step = 0

    def score_all(self, feats: list[str]) -> dict[str, float]:
        return _score_all(self.weights, feats)

    def _bump(self, feat: str, action: str, delta: float) -> None:
        row = self.weights.setdefault(feat, {})
        key = (feat, action)
        current = row.get(action, 0.0)
        self._totals[key] = self._totals.get(key, 0.0) + current * (
            self.step - self._stamps.get(key, 0)
        )
        self._stamps[key] = self.step
        row[action] = current + delta

    def update(self, feats: list[str], gold: str, predicted: str) -> None:
        self.step += 1
        if gold == predicted:
            return
        for feat in feats:
            self._bump(feat, gold, 1.0)
            self._bump(feat, predicted, -1.0)

    def averaged(self) -> dict[str, dict[str, float]]:
        if self.step == 0:
            return {}
        out: dict[str, dict[str, float]] = {}
        for feat, row in self.weights.items():
            for action, weight in row.items():
                key = (feat, action)
                total = self._totals.get(key, 0.0) + weight * (
                    self.step - self._stamps.get(key, 0)
                )
                avg = total / self.step
                if avg:
                    out.setdefault(feat, {})[action] = avg
        return out


def _best_action(scores: dict[str, float], valid: list[str]) -> str:
    # `valid` is sorted, and max() keeps the first of equal keys, so ties
    # resolve to the lexicographically smallest action
    return max(valid, key=lambda a: scores.get(a, 0.0))


def train_parser(
    train: Document,
    schema: TreeSchema,
    language: str = "",
    variety: str = "standard",
    seed: int = 13,
    epochs: int = 8,
) -> ParserModel:
    """Train an averaged perceptron with a static oracle over gold trees.

    Every training sentence must validate under ``schema``; the first one
    that does not aborts training with an error naming the sentence.
    """
    sentences = [s for s in train.sentences if s.single_tokens()]
    if not sentences:
        raise TrainingError("parser training data contains no sentences")
    for i, sent in enumerate(sentences):
        problems = validate_tree(sent, schema)
        if problems:
            name = sent.sent_id or f"sentence {i + 1}"
            raise TrainingError(
                f"gold tree for {name} violates the {schema.value} schema: "
                + "; ".join(problems)
            )

    root_labels = sorted(
        {t.deprel for s in sentences for t in s.single_tokens() if t.head == ROOT}
    )
    dep_labels = sorted(
        {t.deprel for s in sentences for t in s.single_tokens() if t.head != ROOT}
    )

    perceptron = _AveragedPerceptron()
    rng = random.Random(seed)
    indices = list(range(len(sentences)))
    for _ in range(epochs):
        rng.shuffle(indices)
        for idx in indices:
            _train_sentence(perceptron, sentences[idx], dep_labels, root_labels, schema)

    return ParserModel(
        weights=perceptron.averaged(),
        dep_labels=dep_labels,
        root_labels=root_labels,
        schema=schema,
        metadata=ParserMetadata(
            language=language,
            variety=variety,
            sentence_count=len(sentences),
            seed=seed,
            epochs=epochs,
        ),
    )


def _train_sentence(
    perceptron: _AveragedPerceptron,
    sentence: Sentence,
    dep_labels: list[str],
    root_labels: list[str],
    schema: TreeSchema,
) -> None:
    singles = sentence.single_tokens()
    order = [t.id for t in singles]
    n = len(order)
    gold_head = {t.id: t.head for t in singles}
    gold_label = {t.id: t.deprel for t in singles}
    pending = {i: 0 for i in order}
    pending[ROOT] = 0
    for tok in singles:
        pending[tok.head] = pending.get(tok.head, 0) + 1

    view = _token_view(sentence)
    stack = [ROOT]
    pos = 0
    heads: dict[int, int] = {}
    labels: dict[int, str] = {}
    while len(stack) > 1 or pos < n:
        gold = _oracle(stack, pos, n, gold_head, gold_label, pending, dep_labels, root_labels)
        feats = _features(stack, pos, order, view)
        valid = _valid_actions(stack, pos, n, dep_labels, root_labels, schema)
        predicted = _best_action(perceptron.score_all(feats), valid)
        perceptron.update(feats, gold, predicted)
        if _apply(gold, stack, heads, labels):
            stack.append(order[pos])
            pos += 1


def _oracle(
    stack: list[int],
    pos: int,
    n: int,
    gold_head: dict[int, int],
    gold_label: dict[int, str],
    pending: dict[int, int],
    dep_labels: list[str],
    root_labels: list[str],
) -> str:
    if len(stack) >= 2:
        s1, s2 = stack[-1], stack[-2]
        if s2 != ROOT and gold_head.get(s2) == s1 and pending[s2] == 0:
            pending[s1] -= 1
            return f"left={gold_label[s2]}"
        if gold_head.get(s1) == s2 and pending[s1] == 0:
            pending[s2] -= 1
            return f"right={gold_label[s1]}"
    if pos < n:
        return "shift"
    # gold tree is not reachable (non-projective); force a right-arc so the
    # transition sequence still terminates
    s1, s2 = stack[-1], stack[-2]
    label = gold_label.get(s1)
    if s2 == ROOT:
        if label not in root_labels:
            label = root_labels[0]
    elif label not in dep_labels:
        label = dep_labels[0]
    pending[s2] -= 1
    return f"right={label}"


def parse_sentence(model: ParserModel, sentence: Sentence) -> dict[int, tuple[int, str]]:
    """Greedy decode; returns ``{token id: (head, deprel)}``."""
    singles = sentence.single_tokens()
    order = [t.id for t in singles]
    n = len(order)
    view = _token_view(sentence)
    stack = [ROOT]
    pos = 0
    heads: dict[int, int] = {}
    labels: dict[int, str] = {}
    while len(stack) > 1 or pos < n:
        valid = _valid_actions(stack, pos, n, model.dep_labels, model.root_labels, model.schema)
        feats = _features(stack, pos, order, view)
        action = _best_action(_score_all(model.weights, feats), valid)
        if _apply(action, stack, heads, labels):
            stack.append(order[pos])
            pos += 1
    return {i: (heads[i], labels[i]) for i in order}


def _score_all(weights: dict[str, dict[str, float]], feats: list[str]) -> dict[str, float]:
    scores: dict[str, float] = {}
    for feat in feats:
        row = weights.get(feat)
        if row:
            for action, weight in row.items():
                scores[action] = scores.get(action, 0.0) + weight
    return scores


def parse_dependency(
    doc: Document, model: ParserModel, language: str | None = None
) -> Document:
    """Attach heads and labels to every sentence of a copy of ``doc``.

    Requires upos, xpos and lemma on all single tokens (upstream stages must
    have run); the output of every sentence validates under the model schema.
    """
    if language is not None and model.metadata.language not in ("", language):
        raise ModelError(
            f"parser model was trained for language {model.metadata.language!r}, "
            f"pipeline is configured for {language!r}"
        )
    if not model.root_labels:
        raise ModelError("parser model has no root labels; cannot attach trees")

    out = copy_document(doc)
    for si, sent in enumerate(out.sentences):
        where = sent.sent_id or f"sentence {si + 1}"
        for tok in sent.single_tokens():
            if tok.upos is None or tok.xpos is None or tok.lemma is None:
                raise StageError(
                    "depparse",
                    f"token {tok.id} ({tok.form!r}) in {where} misses "
                    "upos/xpos/lemma required for parsing",
                )
        if not sent.single_tokens():
            continue
        parsed = parse_sentence(model, sent)
        for tok in sent.tokens:
            if not tok.is_range:
                tok.head, tok.deprel = parsed[tok.id]
    return out


# --- model persistence -----------------------------------------------------


def save_parser(model: ParserModel, path) -> None:
    meta = {
        "language": model.metadata.language,
        "variety": model.metadata.variety,
        "schema": model.schema.value,
        "sentence_count": model.metadata.sentence_count,
        "seed": model.metadata.seed,
        "epochs": model.metadata.epochs,
    }
    sections = {
        "weights": model.weights,
        "dep_labels": model.dep_labels,
        "root_labels": model.root_labels,
    }
    modelio.write_archive(path, "parser", meta, sections)


def load_parser(path) -> ParserModel:
    meta, sections = modelio.read_archive(path, "parser")
    try:
        model = ParserModel(
            weights=sections["weights"],
            dep_labels=list(sections["dep_labels"]),
            root_labels=list(sections["root_labels"]),
            schema=TreeSchema(meta["schema"]),
            metadata=ParserMetadata(
                language=meta.get("language", ""),
                variety=meta.get("variety", "standard"),
                sentence_count=meta.get("sentence_count", 0),
                seed=meta.get("seed", 0),
                epochs=meta.get("epochs", 0),
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"{path}: malformed parser model: {exc}") from exc
    return model
