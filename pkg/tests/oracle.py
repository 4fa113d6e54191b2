"""Independent naive reference implementations used to check the engine.

Everything here deliberately avoids the engine's enumeration, caching,
vectorization and aggregation code paths: plain Python loops, its own argmax,
its own verdict logic, its own sorting and rendering.
"""
import math


def naive_argmax(values):
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def score_text(port, text_input, view, memo):
    key = (text_input.text, view.fingerprint())
    if key not in memo:
        memo[key] = port.score_batch([text_input], [view])[0][0]
    return memo[key]


def naive_systematicity(transform, dataset, port, view, pos_index=1):
    """All ordered pairs (i, j), i != j: strict-order premise over source
    scores implies strict order over follow-up scores. Returns per-group
    counts and per-input counts."""
    from morphcheck.transforms import apply

    memo = {}
    k = len(dataset)
    src = [score_text(port, e, view, memo).values[pos_index] for e in dataset]
    flw = [
        score_text(port, apply(transform, e), view, memo).values[pos_index]
        for e in dataset
    ]
    satisfied = violated = vacuous = 0
    per_input = {e.id: [0, 0] for e in dataset}  # [violated, nonvacuous]
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            premise = src[i] < src[j]
            if not premise:
                vacuous += 1
                continue
            if flw[i] < flw[j]:
                satisfied += 1
            else:
                violated += 1
            for e in (i, j):
                per_input[dataset[e].id][1] += 1
                if not (flw[i] < flw[j]):
                    per_input[dataset[e].id][0] += 1
    return satisfied, violated, vacuous, per_input


def naive_transitivity(dataset, port, view, class_index, separator, triplets):
    """Brute-force premise filter and violation proportion over given index
    triplets."""
    from morphcheck.core import TextInput

    memo = {}

    def v(i, j):
        a, b = dataset[i], dataset[j]
        pair = TextInput(id=f"({a.id},{b.id})", text=a.text + separator + b.text)
        sv = score_text(port, pair, view, memo)
        return naive_argmax(sv.values) == class_index

    survivors = []
    satisfied = violated = vacuous = 0
    for (i, j, l) in triplets:
        if v(i, j) and v(j, l):
            survivors.append((i, j, l))
            if v(i, l):
                satisfied += 1
            else:
                violated += 1
        else:
            vacuous += 1
    denom = satisfied + violated
    proportion = violated / denom if denom else 0.0
    return survivors, satisfied, violated, vacuous, proportion


def rows_to_csv(rows):
    """Render (key, violated, satisfied, vacuous, errors) tuples the way the
    engine documents its CSV report: sorted by descending violation
    proportion, ties by key ascending."""
    decorated = []
    for key, violated, satisfied, vacuous, errors in rows:
        denom = violated + satisfied
        proportion = violated / denom if denom else 0.0
        decorated.append((proportion, key, violated, satisfied, vacuous, errors))
    decorated.sort(key=lambda r: (-r[0], r[1]))
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "proportion", "violated", "satisfied", "vacuous", "errors"])
    for proportion, key, violated, satisfied, vacuous, errors in decorated:
        writer.writerow([key, f"{proportion:.6f}", violated, satisfied, vacuous, errors])
    return buf.getvalue()
