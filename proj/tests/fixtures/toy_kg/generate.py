"""Writes the block-structured toy graph used by the link predictor tests.

50 entities in 10 clusters of 5. Each relation links whole clusters, so a
held-out edge inside a block is recoverable from the rest of the block, and
held-out reversals of IsA / HasA triples are recoverable through the schema.
"""
import random

rng = random.Random(7)
clusters = [[f"ent{c}{i}" for i in range(5)] for c in range(10)]

triples = []
for src, dst in [(0, 1), (2, 3), (4, 5)]:
    triples += [(h, "AtLocation", t) for h in clusters[src] for t in clusters[dst]]
for src, dst in [(6, 7), (8, 9)]:
    triples += [(h, "UsedFor", t) for h in clusters[src] for t in clusters[dst]]
triples += [(h, "HasA", t) for h in clusters[5] for t in clusters[6]]
triples += [(h, "PartOf", t) for h in clusters[9] for t in clusters[0]]
for c in (0, 2):
    members = clusters[c]
    for i in range(5):
        for j in range(i + 1, 5):
            triples.append((members[i], "IsA", members[j]))

rng.shuffle(triples)
block = [t for t in triples if t[1] != "IsA"]
held_block = block[:18]
train = [t for t in triples if t not in held_block]
# Reversals only the schema can supply.
isa = [t for t in train if t[1] == "IsA"]
hasa = [t for t in train if t[1] == "HasA"]
held_rev = [(t, "IsA", h) for h, _, t in rng.sample(isa, 6)]
held_rev += [(t, "PartOf", h) for h, _, t in rng.sample(hasa, 6)]

with open("train.tsv", "w") as f:
    for h, r, t in sorted(train):
        f.write(f"{h}\t{r}\t{t}\n")
with open("heldout.tsv", "w") as f:
    for h, r, t in sorted(held_block + held_rev):
        f.write(f"{h}\t{r}\t{t}\n")
with open("schema.txt", "w") as f:
    f.write("IsA [sym]\nPartOf [inv:HasA]\nHasA\nAtLocation\nUsedFor\n")
