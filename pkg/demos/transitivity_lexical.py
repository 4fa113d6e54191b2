"""Three-way transitivity over a lexical-relation classifier.

For word triplets (w1, w2, w3): if the model calls (w1, w2) and (w2, w3)
hypernym pairs, it must also call (w1, w3) one. Triplets whose premise fails
are vacuous and excluded from the violation proportion.

Two backends make the mechanics visible: the raw taxonomy stub (only direct
edges answer "hyp", so transitivity often fails) and the same graph with its
reachability closure (transitivity holds by construction).
"""
from morphcheck import BooleanPredicate, EnumerationMode, ThreeWayTransitivity, run
from morphcheck.adapters import TaxonomyLexical
from morphcheck.fixtures import small_taxonomy


def main():
    syn, hyper, dataset = small_taxonomy(n_words=50)
    plan = ThreeWayTransitivity(predicate=BooleanPredicate(name="v_hyp", class_index=2))
    mode = EnumerationMode(
        shape="ordered_triplets", selection="sample", sample_size=5000, sample_seed=0
    )
    print(f"{len(dataset)} words, sampling {mode.sample_size} of "
          f"{len(dataset) * (len(dataset) - 1) * (len(dataset) - 2)} ordered triplets\n")

    for label, closure in (("direct edges only", False), ("reachability closure", True)):
        port = TaxonomyLexical(syn, hyper, transitive_closure=closure)
        vs = run(plan, dataset, mode, port)
        print(f"{label}:")
        print(f"  satisfied={vs.satisfied} violated={vs.violated} vacuous={vs.vacuous}")
        print(f"  violation proportion: {vs.violation_proportion():.4f}\n")


if __name__ == "__main__":
    main()
