"""Cross-check detector labels against object captions.

Detectors sometimes misread ambiguous items (folded socks labeled as a
ball, a paper roll labeled as a cup).  A caption of the cropped object
gives an independent description; when it clearly contradicts the label,
the label is overridden or flagged for review depending on policy.

Matching is lexicon-driven: a set of canonical labels, each with synonym
phrases.  Captions are normalized to lowercase word tokens and scanned
greedily for the longest matching phrases, so "toilet paper" wins over a
bare "paper".
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

POLICIES = ("override", "flag_only")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class LexiconError(ValueError):
    """Invalid lexicon contents (duplicate labels or shared synonyms)."""


def normalize(text: str) -> list[str]:
    """Lowercase word tokens with punctuation stripped."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Lexicon:
    """Canonical labels mapped to synonym phrases (the label included)."""

    entries: dict[str, tuple[str, ...]]
    _phrase_to_label: dict[tuple[str, ...], str] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        phrase_map: dict[tuple[str, ...], str] = {}
        for label, synonyms in self.entries.items():
            canon = tuple(normalize(label))
            if not canon:
                raise LexiconError(f"empty canonical label {label!r}")
            for phrase in (label, *synonyms):
                tokens = tuple(normalize(phrase))
                if not tokens:
                    continue
                owner = phrase_map.get(tokens)
                if owner is not None and owner != label:
                    raise LexiconError(
                        f"synonym {phrase!r} maps to both {owner!r} and {label!r}"
                    )
                phrase_map[tokens] = label
        object.__setattr__(self, "_phrase_to_label", phrase_map)

    def phrases_of(self, label: str) -> list[tuple[str, ...]]:
        return [p for p, owner in self._phrase_to_label.items() if owner == label]

    def canonical_of(self, phrase_tokens: tuple[str, ...]) -> str | None:
        return self._phrase_to_label.get(phrase_tokens)

    @property
    def max_phrase_len(self) -> int:
        return max((len(p) for p in self._phrase_to_label), default=0)

    @classmethod
    def from_file(cls, path) -> "Lexicon":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise LexiconError("lexicon file must be a JSON object")
        return cls({str(k): tuple(str(s) for s in v) for k, v in doc.items()})


@dataclass(frozen=True)
class Reconciliation:
    original_label: str
    final_label: str
    action: str  # kept | overridden | flagged
    matched_phrases: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "original_label": self.original_label,
            "final_label": self.final_label,
            "action": self.action,
            "matched_phrases": list(self.matched_phrases),
        }


def _contains(haystack: list[str], needle: tuple[str, ...]) -> bool:
    n = len(needle)
    return any(tuple(haystack[i : i + n]) == needle for i in range(len(haystack) - n + 1))


def _greedy_matches(tokens: list[str], lexicon: Lexicon) -> list[tuple[str, ...]]:
    """Longest-first phrase matches over the caption, non-overlapping."""
    matches = []
    i = 0
    max_len = lexicon.max_phrase_len
    while i < len(tokens):
        hit = None
        for n in range(min(max_len, len(tokens) - i), 0, -1):
            candidate = tuple(tokens[i : i + n])
            if lexicon.canonical_of(candidate) is not None:
                hit = candidate
                break
        if hit is None:
            i += 1
        else:
            matches.append(hit)
            i += len(hit)
    return matches


def reconcile(
    label: str,
    caption: str,
    lexicon: Lexicon | None = None,
    policy: str = "override",
) -> Reconciliation:
    """Compare a detector label against a caption of the same object.

    The caption supports the label when the label or any of its synonyms
    appears anywhere in it; then the label is kept.  With no support and
    at least one competing lexicon match the caption contradicts the
    label: the label is replaced by the best match (override policy) or
    flagged for manual review (flag_only policy).  A caption matching
    nothing keeps the label.
    """
    if not caption or not caption.strip():
        raise ValueError("caption must be non-empty")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if lexicon is None:
        lexicon = default_lexicon()
    canon = lexicon.canonical_of(tuple(normalize(label)))
    if canon is None:
        # Unknown detector label: treat it as its own canonical entry.
        lexicon = Lexicon({**lexicon.entries, label: ()})
        canon = label

    tokens = normalize(caption)
    own_phrases = lexicon.phrases_of(canon)
    supported = any(_contains(tokens, phrase) for phrase in own_phrases)

    matches = _greedy_matches(tokens, lexicon)
    competing = [m for m in matches if lexicon.canonical_of(m) != canon]

    if supported or not competing:
        return Reconciliation(label, label, "kept", tuple(" ".join(m) for m in matches))

    # Contradiction: rank competitors by phrase length (words, then
    # characters), then alphabetically by canonical label.
    best = min(
        competing,
        key=lambda m: (-len(m), -len(" ".join(m)), lexicon.canonical_of(m)),
    )
    matched = tuple(" ".join(m) for m in competing)
    if policy == "flag_only":
        return Reconciliation(label, label, "flagged", matched)
    return Reconciliation(label, lexicon.canonical_of(best), "overridden", matched)


# The 80 COCO detector labels plus tabletop items that detectors commonly
# confuse; synonyms are everyday alternates likely to appear in captions.
_COCO_LABELS = (
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep",
    "cow", "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
    "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
    "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
    "surfboard", "tennis racket", "bottle", "wine glass", "cup", "fork",
    "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
    "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "dining table", "toilet", "tv",
    "laptop", "mouse", "remote", "keyboard", "cell phone", "microwave",
    "oven", "toaster", "sink", "refrigerator", "book", "clock", "vase",
    "scissors", "teddy bear", "hair drier", "toothbrush",
)

_EXTRA_SYNONYMS = {
    "sports ball": ("ball",),
    "cell phone": ("phone", "mobile phone", "smartphone"),
    "tv": ("television", "tv screen"),
    "couch": ("sofa",),
    "remote": ("remote control",),
    "motorcycle": ("motorbike",),
    "airplane": ("plane", "aeroplane"),
    "hair drier": ("hair dryer", "blow dryer"),
    "wine glass": ("glass of wine",),
    "potted plant": ("plant", "houseplant"),
    "bottle": ("water bottle", "bottle of water"),
    "cup": ("mug", "coffee cup"),
    "book": ("notebook",),
    "teddy bear": ("stuffed bear", "plush bear"),
}

_TABLETOP_ITEMS = {
    "socks": ("sock", "pair of socks"),
    "toilet paper": ("toilet roll", "roll of toilet paper", "paper roll"),
    "box": ("cardboard box",),
    "pen": ("ballpoint pen",),
    "candle": (),
    "stapler": (),
}

_DEFAULT: Lexicon | None = None


def default_lexicon() -> Lexicon:
    """Built-in lexicon: COCO labels plus common tabletop items."""
    global _DEFAULT
    if _DEFAULT is None:
        entries = {label: _EXTRA_SYNONYMS.get(label, ()) for label in _COCO_LABELS}
        entries.update(_TABLETOP_ITEMS)
        _DEFAULT = Lexicon(entries)
    return _DEFAULT
