"""Half-full trees: the unique leaf-count-addressed binary trees whose merge
behaves like binary addition of leaf counts.

A half-full tree on k leaves is either a single leaf, or an internal node whose
left subtree is a complete tree holding at least half the leaves and whose right
subtree is again half-full. Decomposing along right children ("strip") yields one
complete tree per set bit of k; merging two trees carries complete subtrees of
equal height exactly like binary addition carries bits.

Trees are immutable: internal nodes are Node(left, right); anything that is not
a Node is a leaf payload. Heights are counted in edges.
"""

from collections import namedtuple

Node = namedtuple("Node", ["left", "right"])


def is_leaf(t):
    return not isinstance(t, Node)


def leaf_count(t):
    return 1 if is_leaf(t) else leaf_count(t.left) + leaf_count(t.right)


def height(t):
    return 0 if is_leaf(t) else 1 + max(height(t.left), height(t.right))


def leaves(t):
    if is_leaf(t):
        return [t]
    return leaves(t.left) + leaves(t.right)


def is_complete(t):
    # complete == perfect here: 2^h leaves, all at depth h
    if is_leaf(t):
        return True
    return (is_complete(t.left) and is_complete(t.right)
            and height(t.left) == height(t.right))


def is_haft(t):
    """Check the defining property at every internal node: the left subtree is
    complete and holds at least half of the node's leaves."""
    if is_leaf(t):
        return True
    if not is_complete(t.left):
        return False
    if 2 * leaf_count(t.left) < leaf_count(t):
        return False
    return is_haft(t.right)


def build(payloads):
    """The half-full tree over the payload sequence (left-to-right leaf order)."""
    k = len(payloads)
    if k == 0:
        raise ValueError("no payloads")
    if k == 1:
        return payloads[0]
    p = 1 << (k.bit_length() - 1)   # largest power of two <= k
    if p == k:
        p //= 2
    return Node(build(payloads[:p]), build(payloads[p:]))


def strip(t):
    """Primary roots: the maximal complete subtrees along the right spine,
    in decreasing height order — one per set bit of the leaf count."""
    if is_complete(t):
        return [t]
    return [t.left] + strip(t.right)


def _min_payload(t):
    return min(leaves(t))


def merge(a, b):
    """Merge two half-full trees into the half-full tree on the union of their
    leaves. Mirrors binary addition of the leaf counts: complete subtrees of
    equal height pair up into carries, then the survivors chain onto a spine.

    Equal-height pairs combine smallest height first; among more than two
    candidates the two with the smallest minimum payload go first, and the one
    with the smaller minimum payload becomes the left child.
    """
    roots = strip(a) + strip(b)
    heights = {}
    for r in roots:
        heights.setdefault(height(r), []).append(r)
    # carry pass
    h = 0
    while h <= max(heights):
        bucket = heights.get(h, [])
        if len(bucket) >= 2:
            bucket.sort(key=_min_payload)
            x, y = bucket[0], bucket[1]
            heights[h] = bucket[2:]
            heights.setdefault(h + 1, []).append(Node(x, y))
            continue   # a carry may cascade at the same or next height
        h += 1
    survivors = sorted((h for h in heights if heights[h]))
    acc = heights[survivors[0]][0]
    for h in survivors[1:]:
        acc = Node(heights[h][0], acc)
    return acc
