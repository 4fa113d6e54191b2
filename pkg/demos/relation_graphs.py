"""Emit the evaluation-graph structure of each relation class as DOT.

Circles are texts (grey = freely chosen source inputs), squares are model
outputs, T edges are text transformations, f/g edges are model applications,
and the dashed links attach the property P to the outputs it constrains.
"""
from morphcheck import compile_plan, emit_dot
from morphcheck.cli import _representative_plan

RELATIONS = [
    "single_input",
    "pairwise_systematicity",
    "pairwise_compositionality",
    "three_way_transitivity",
]


def main():
    for name in RELATIONS:
        graph = compile_plan(_representative_plan(name))
        print(emit_dot(graph, name=name))


if __name__ == "__main__":
    main()
