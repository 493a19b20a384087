"""Pure-Python versions of the hot loops.

Every function here has a twin in ``_ckernels.pyx`` with the same
signature and results; ``selfsim.kernels`` picks one at import.
Tables are row-per-state: ``out[s][x]`` is the output letter of state
``s`` on letter ``x`` and ``to[s][x]`` the index of its restriction.
"""
from itertools import product


def _relabel(signatures):
    seen = {}
    labels = []
    for sig in signatures:
        label = seen.get(sig)
        if label is None:
            label = seen[sig] = len(seen)
        labels.append(label)
    return labels, len(seen)


def refine_partition(out, to):
    """Coarsest partition of the states compatible with outputs and transitions.

    Two states share a label iff they act identically on every word.
    Labels are numbered by first occurrence.
    """
    labels, count = _relabel([tuple(row) for row in out])
    while True:
        sigs = [
            (labels[s],) + tuple(labels[t] for t in to[s]) for s in range(len(out))
        ]
        labels, new_count = _relabel(sigs)
        if new_count == count:
            return labels
        count = new_count


def brute_force_fixed(out, to, start, k, accept):
    """Enumerate ``X^k`` and count words fixed from ``start``.

    Returns ``(fixed, fixed_and_accepted)`` where the second count only
    includes words whose final state has ``accept[state]`` set.
    """
    if k == 0:
        return 1, int(bool(accept[start]))
    size = len(out[start])
    fixed = accepted = 0
    for word in product(range(size), repeat=k):
        state = start
        for x in word:
            if out[state][x] != x:
                break
            state = to[state][x]
        else:
            fixed += 1
            if accept[state]:
                accepted += 1
    return fixed, accepted


def act_on_word(out, to, start, word):
    """Image of ``word`` under ``start`` and the state reached."""
    state = start
    image = []
    for x in word:
        image.append(out[state][x])
        state = to[state][x]
    return image, state
