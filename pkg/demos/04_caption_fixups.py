"""Caption reconciliation: catching detector mislabels with captions.

Detectors confuse visually ambiguous items; a caption of the cropped
object is an independent witness.  When the caption clearly contradicts
the label, the label is overridden (or just flagged, by policy).
"""

from pointtarget import Lexicon, reconcile

cases = [
    ("sports ball", "a pair of socks on a table"),
    ("cup", "a roll of toilet paper"),
    ("bottle", "a bottle of water on a desk"),
    ("cup", "a white mug next to a keyboard"),
    ("bowl", "something entirely unrecognizable"),
]

print(f"{'label':<14} {'caption':<38} {'action':<11} final")
for label, caption in cases:
    rec = reconcile(label, caption)
    print(f"{label:<14} {caption:<38} {rec.action:<11} {rec.final_label}")

print("\nflag-only policy keeps the label but marks it for review:")
rec = reconcile("sports ball", "a pair of socks on a table", policy="flag_only")
print(f"  action={rec.action}, final={rec.final_label}, matched={list(rec.matched_phrases)}")

print("\ncustom lexicons extend the label space:")
lex = Lexicon({"screwdriver": ("phillips", "flathead"), "wrench": ("spanner",)})
rec = reconcile("wrench", "a phillips screwdriver on the bench", lexicon=lex)
print(f"  wrench -> {rec.final_label} ({rec.action})")
