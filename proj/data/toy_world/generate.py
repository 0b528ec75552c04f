"""Writes the toy world used by the end-to-end fixture.

Six intents. Utterances never contain a label word; each one pairs an action
word and an object word that the graph links to the label's Action and
Object through the same relation pattern for every intent. Word vectors are
random, so label words carry no distributional hint about utterance words.
"""
import json
import random

rng = random.Random(11)

INTENTS = {
    "BookHotel": (["reserve", "arrange"], ["suite", "hostel", "inn", "motel"]),
    "PlaySong": (["perform", "stream"], ["tune", "melody", "track", "ballad"]),
    "FindRestaurant": (["locate", "search"], ["diner", "bistro", "eatery", "cafe"]),
    "OrderPizza": (["request", "purchase"], ["pepperoni", "slice", "margherita", "calzone"]),
    "RentCar": (["lease", "hire"], ["sedan", "vehicle", "convertible", "jeep"]),
    "WatchMovie": (["view", "see"], ["film", "cinema", "flick", "thriller"]),
}
ACTION_RELATIONS = ["Synonym", "RelatedTo"]
OBJECT_RELATIONS = ["IsA", "Synonym", "AtLocation", "RelatedTo"]
# Background facts among the label concepts and a few extra nodes.
BACKGROUND = [
    ("hotel", "AtLocation", "city"), ("restaurant", "AtLocation", "city"),
    ("cinema", "AtLocation", "city"), ("song", "IsA", "music"),
    ("pizza", "IsA", "food"), ("restaurant", "UsedFor", "food"),
    ("car", "UsedFor", "travel"), ("hotel", "UsedFor", "travel"),
    ("movie", "HasA", "actor"), ("song", "HasA", "singer"),
]

PREFIX = ["please", "can you", "i want to"]
DET = ["a", "the"]
SUFFIX = ["", "now"]
PER_INTENT = 33


def split_camel(label):
    out, cur = [], ""
    for ch in label:
        if ch.isupper() and cur:
            out.append(cur)
            cur = ""
        cur += ch
    return out + [cur]


triples = set(BACKGROUND)
for label, (actions, objects) in INTENTS.items():
    action, obj = (w.lower() for w in split_camel(label))
    for w, r in zip(actions, ACTION_RELATIONS):
        triples.add((w, r, action))
    for w, r in zip(objects, OBJECT_RELATIONS):
        triples.add((w, r, obj))

label_words = {w.lower() for l in INTENTS for w in split_camel(l)}
records = []
for label, (actions, objects) in INTENTS.items():
    texts = set()
    while len(texts) < PER_INTENT:
        words = [rng.choice(PREFIX), rng.choice(actions), rng.choice(DET),
                 rng.choice(objects), rng.choice(SUFFIX)]
        texts.add(" ".join(w for w in words if w))
    for t in sorted(texts):
        assert not label_words & set(t.split()), t
        records.append({"text": t, "intent": label})
rng.shuffle(records)

entities = {h for h, _, _ in triples} | {t for _, _, t in triples}
assert len(entities) <= 60, len(entities)
assert len(records) <= 200

with open("../conceptnet_relations.schema") as f:
    schema = [l.strip() for l in f if l.strip() and not l.startswith("#")]
with open("kg.store", "w") as f:
    f.write("# kgi-store v1\n")
    for line in schema:
        f.write(f"#!relation {line}\n")
    for h, r, t in sorted(triples):
        f.write(f"{h}\t{r}\t{t}\n")

with open("dataset.jsonl", "w") as f:
    for r in records:
        f.write(json.dumps(r) + "\n")

vocab = sorted({w for r in records for w in r["text"].split()} | label_words)
DIM = 64
with open("vectors.txt", "w") as f:
    f.write(f"{len(vocab)} {DIM}\n")
    for w in vocab:
        f.write(w + " " + " ".join(f"{rng.gauss(0, 1):.6f}" for _ in range(DIM)) + "\n")

print(f"{len(entities)} entities, {len(triples)} triples, "
      f"{len(records)} utterances, {len(vocab)} words")
