"""Pairwise compositionality with a trained hidden-state probe.

The pipeline:
  1. instantiate word pairs like (tree, cherry tree) into a neutral training
     context and train a linear probe on the pooled hidden vectors;
  2. instantiate held-out pairs into monotone contexts ("There was no <x>."
     is downward monotone, "We stood on the brink of a <x>." upward);
  3. check, pair against pair, that the probe's hidden-state ordering agrees
     (downward) or anti-agrees (upward) with the model's output ordering.
"""
from morphcheck import EnumerationMode, aggregate
from morphcheck.adapters import HashEmbedding
from morphcheck.cli import build_compositionality_jobs
from morphcheck.engine import ScoreCache, VerdictSet, render_markdown, run
from morphcheck.fixtures import insertion_pairs, monotone_contexts


def main():
    port = HashEmbedding(dim=16, seed=0)
    contexts = monotone_contexts()
    pairs = insertion_pairs()
    print(f"{len(pairs)} insertion pairs: half train the probe, half are evaluated")
    print(f"{len(contexts)} contexts (mixed upward/downward monotone)\n")

    jobs, probe = build_compositionality_jobs(contexts, pairs, port)
    meta = probe.trained_on
    print(f"probe: {int(meta['examples'])} training examples, "
          f"train accuracy {meta['train_accuracy']:.3f}\n")

    mode = EnumerationMode(shape="unordered_pairs")
    cache = ScoreCache()
    merged = VerdictSet()
    for plan, dataset in jobs:
        merged.merge(run(plan, dataset, mode, port, cache=cache))

    print(render_markdown(aggregate(merged, "by_context")))
    print(render_markdown(aggregate(merged, "by_insertion_pair")))


if __name__ == "__main__":
    main()
