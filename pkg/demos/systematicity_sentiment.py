"""Pairwise systematicity on a sentiment model, end to end.

For every ordered pair of reviews (x1, x2): if the model ranks x1 below x2,
it must still rank them the same way after both get the same irrelevant
sentence concatenated. No labels are needed — only the model's own scores.
"""
from morphcheck import (
    EnumerationMode,
    Ord,
    PairwiseSystematicity,
    ScoreView,
    aggregate,
    run_suite,
)
from morphcheck.adapters import LexiconSentiment
from morphcheck.engine import render_markdown
from morphcheck.fixtures import fixture_valence, sentiment_transforms, synthetic_reviews


def main():
    dataset = synthetic_reviews(n=50)
    port = LexiconSentiment(fixture_valence(50))
    s_pos = ScoreView(name="s_pos", extraction="softmax_component", index=1)

    plans = [
        PairwiseSystematicity(
            transform=t,
            premise=Ord(s_pos, 0, 1),        # score(x1) < score(x2)
            hypothesis=Ord(s_pos, 2, 3),     # score(T(x1)) < score(T(x2))
        )
        for t in sentiment_transforms()
    ]

    mode = EnumerationMode(shape="ordered_pairs")
    print(f"{len(dataset)} reviews -> {len(dataset) * (len(dataset) - 1)} ordered pairs "
          f"per transformation, {len(plans)} transformations\n")

    merged = run_suite(plans, dataset, mode, port)
    print(render_markdown(aggregate(merged, "by_transformation")))
    print(f"overall violation proportion: {merged.violation_proportion():.4f}")
    print("(the lexicon stub is order-preserving by construction, so a clean "
          "run shows zero violations; a real model rarely does)")


if __name__ == "__main__":
    main()
