#!/usr/bin/env python3
"""Regenerate the 200-caption tampering fixture.

Writes, next to this script:
  captions.json   COCO-style captions (40 images x 5 captions)
  parses.conllu   UD-style dependency parses of every caption
  lexicon.json    50 synsets in 7 lexicographer categories

Captions come from templates whose dependency structure is known, so the
parses are exact by construction. Some templates deliberately produce
captions the pipeline must skip: proper-noun heads and heads missing from
the lexicon.

Run from this directory: python3 generate.py
"""

import json
import random

# ---------------------------------------------------------------------------
# Lexicon

SYNSETS = [
    # noun.person
    ("n", "noun.person", ["child", "kid", "youngster"], "a young person holding toys or playing", []),
    ("n", "noun.person", ["man", "adult male"], "an adult person who is male", []),
    ("n", "noun.person", ["boy", "male child"], "a youthful male person", []),
    ("n", "noun.person", ["woman", "adult female"], "an adult female person", []),
    ("n", "noun.person", ["girl", "miss"], "a young female person", []),
    ("n", "noun.person", ["chef"], "a professional cook in a kitchen", []),
    ("n", "noun.person", ["mime", "mimer"], "a performer who acts without words", []),
    ("n", "noun.person", ["checker"], "an attendant who checks coats or baggage", []),
    ("n", "noun.person", ["wad"], "a person holding a large amount of money", []),
    ("n", "noun.person", ["bear"], "an investor with a pessimistic market outlook", []),
    ("n", "noun.person", ["Elizabeth Fry", "Fry"], "English prison reformer", ["Elizabeth Fry", "Fry"]),
    ("n", "noun.person", ["squirt", "small fry"], "a young person of small stature", []),
    # noun.animal
    ("n", "noun.animal", ["dog", "domestic dog"], "a domesticated canine kept as a pet", []),
    ("n", "noun.animal", ["cat", "true cat"], "a small feline pet that sleeps on a couch", []),
    ("n", "noun.animal", ["horse"], "a hoofed animal that people ride", []),
    ("n", "noun.animal", ["giraffe"], "a tall african animal with a long neck", []),
    ("n", "noun.animal", ["zebra"], "an african animal with black and white stripes", []),
    ("n", "noun.animal", ["elephant"], "a very large animal with a trunk", []),
    ("n", "noun.animal", ["sheep"], "a woolly animal kept in a flock on a field", []),
    ("n", "noun.animal", ["bear"], "a large heavy animal with thick fur that lives in the woods", []),
    ("n", "noun.animal", ["bat", "chiropteran"], "a nocturnal mouselike mammal that can fly at night", []),
    # noun.artifact
    ("n", "noun.artifact", ["umbrella"], "a canopy that protects from rain", []),
    ("n", "noun.artifact", ["bat", "club"], "a club used for hitting a ball in games", []),
    ("n", "noun.artifact", ["kite"], "a plaything that can fly in the wind", []),
    ("n", "noun.artifact", ["skateboard"], "a board with wheels to ride on", []),
    ("n", "noun.artifact", ["bench"], "a long seat in a park", []),
    ("n", "noun.artifact", ["table"], "a piece of furniture with a flat top", []),
    ("n", "noun.artifact", ["truck"], "a vehicle for carrying heavy loads", []),
    ("n", "noun.artifact", ["box"], "a container made of cardboard or wood", []),
    ("n", "noun.artifact", ["case", "display case"], "a container full of goods", []),
    ("n", "noun.artifact", ["plate"], "a flat dish for food", []),
    # noun.food
    ("n", "noun.food", ["pizza", "pizza pie"], "a flat bread with cheese and tomato", []),
    ("n", "noun.food", ["sandwich"], "two slices of bread with a filling", []),
    ("n", "noun.food", ["banana"], "an elongated yellow fruit", []),
    ("n", "noun.food", ["cake"], "a sweet baked dessert with frosting", []),
    ("n", "noun.food", ["hot dog", "frank"], "a sausage in a bun", []),
    ("n", "noun.food", ["donut", "doughnut"], "a small ring of sweet fried dough", []),
    # verb.motion
    ("v", "verb.motion", ["walk"], "use the feet to move across the park", [], [2, 22]),
    ("v", "verb.motion", ["run"], "move fast using the legs across the field", [], [2, 22]),
    ("v", "verb.motion", ["fly"], "travel through the air", [], [2]),
    ("v", "verb.motion", ["ride"], "be carried on a horse or a board", [], [2, 8]),
    ("v", "verb.motion", ["jump", "leap"], "move forward by leaps and bounds", [], [2]),
    # verb.contact
    ("v", "verb.contact", ["hold", "grasp"], "keep something in the hands", [], [8]),
    ("v", "verb.contact", ["carry"], "move something while holding it", [], [8]),
    ("v", "verb.contact", ["touch"], "make physical contact with something", [], [8]),
    ("v", "verb.contact", ["push"], "press against something to move it", [], [8, 9]),
    ("v", "verb.contact", ["grab", "snatch"], "take hold of something suddenly", [], [8]),
    ("v", "verb.contact", ["pet", "stroke"], "stroke an animal gently with the hand", [], [8]),
    # verb.consumption
    ("v", "verb.consumption", ["eat"], "take in solid food", [], [8, 2]),
    ("v", "verb.consumption", ["drink", "imbibe"], "take in liquids", [], [8, 2]),
]


def lexicon():
    out = []
    for i, entry in enumerate(SYNSETS, start=1):
        pos, category, lemmas, gloss, proper = entry[:5]
        frames = entry[5] if len(entry) > 5 else []
        out.append({
            "id": f"{i:08d}-{pos}",
            "pos": {"n": "noun", "v": "verb"}[pos],
            "category": category,
            "lemmas": lemmas,
            "gloss": gloss,
            "frames": frames,
            "proper_nouns": proper,
        })
    assert len(out) == 50, len(out)
    return {"synsets": out}


# ---------------------------------------------------------------------------
# Morphology of the words the templates use

PLURAL = {"man": "men", "woman": "women", "child": "children", "sheep": "sheep"}
PAST = {"run": "ran", "fly": "flew", "ride": "rode", "hold": "held", "eat": "ate",
        "drink": "drank", "grab": "grabbed", "pet": "petted", "carry": "carried"}
GERUND = {"run": "running", "ride": "riding", "grab": "grabbing", "pet": "petting"}


def plural(n):
    return PLURAL.get(n, n + "s")


def past(v):
    return PAST.get(v, v + "d" if v.endswith("e") else v + "ed")


def gerund(v):
    return GERUND.get(v, v + "ing")


def third(v):
    if v == "carry":
        return "carries"
    if v == "push" or v == "touch":
        return v + "es"
    return v + "s"


def article(word):
    return "an" if word[0] in "aeiou" else "a"


PERSONS = ["man", "woman", "boy", "girl", "child", "chef"]
ANIMALS = ["dog", "cat", "horse", "giraffe", "zebra", "elephant", "sheep", "bear"]
OBJECTS = ["umbrella", "kite", "skateboard", "box", "plate", "bat", "bench", "truck"]
FOODS = ["pizza", "sandwich", "banana", "cake", "donut"]
MOTION = ["walk", "run", "fly", "ride", "jump"]
CONTACT = ["hold", "carry", "touch", "push", "grab", "pet"]
EAT = ["eat", "drink"]
ADJS = ["young", "small", "old", "happy", "tall"]
PLACES = ["park", "field", "street", "beach", "yard"]
NAMES = ["Obama", "Alice", "Picasso"]


# Token: (surface, lemma, upos, head (1-based, 0 = root), deprel)
def sent(tokens):
    text = ""
    for i, (s, *_rest) in enumerate(tokens):
        if i > 0 and s not in (".", ","):
            text += " "
        text += s
    return text, tokens


def t_noun_holding(rng):
    # A young man holding an umbrella .   root = noun
    n = rng.choice(PERSONS + ANIMALS)
    adj = rng.choice(ADJS)
    o = rng.choice(OBJECTS)
    return sent([
        ("A", "a", "DET", 3, "det"), (adj, adj, "ADJ", 3, "amod"), (n, n, "NOUN", 0, "root"),
        ("holding", "hold", "VERB", 3, "acl"), (article(o), article(o), "DET", 6, "det"),
        (o, o, "NOUN", 4, "obj"), (".", ".", "PUNCT", 3, "punct"),
    ])


def t_progressive(rng):
    # The girl is holding a kite in the park .   root = gerund verb
    n = rng.choice(PERSONS)
    v = rng.choice(CONTACT)
    o = rng.choice(OBJECTS)
    p = rng.choice(PLACES)
    return sent([
        ("The", "the", "DET", 2, "det"), (n, n, "NOUN", 4, "nsubj"), ("is", "be", "AUX", 4, "aux"),
        (gerund(v), v, "VERB", 0, "root"), (article(o), article(o), "DET", 6, "det"),
        (o, o, "NOUN", 4, "obj"), ("in", "in", "ADP", 9, "case"), ("the", "the", "DET", 9, "det"),
        (p, p, "NOUN", 4, "obl"), (".", ".", "PUNCT", 4, "punct"),
    ])


def t_plural_present(rng):
    # Two dogs run across the field .   root = base-form verb
    n = rng.choice(ANIMALS)
    v = rng.choice(MOTION)
    p = rng.choice(PLACES)
    return sent([
        ("Two", "two", "NUM", 2, "nummod"), (plural(n), n, "NOUN", 3, "nsubj"),
        (v, v, "VERB", 0, "root"), ("across", "across", "ADP", 6, "case"),
        ("the", "the", "DET", 6, "det"), (p, p, "NOUN", 3, "obl"), (".", ".", "PUNCT", 3, "punct"),
    ])


def t_third_person(rng):
    # A chef carries a plate .   root = 3sg verb
    n = rng.choice(PERSONS)
    v = rng.choice(CONTACT + EAT)
    o = rng.choice(FOODS if v in EAT else OBJECTS)
    return sent([
        (article(n).capitalize(), article(n), "DET", 2, "det"), (n, n, "NOUN", 3, "nsubj"),
        (third(v), v, "VERB", 0, "root"), (article(o), article(o), "DET", 5, "det"),
        (o, o, "NOUN", 3, "obj"), (".", ".", "PUNCT", 3, "punct"),
    ])


def t_past(rng):
    # The boy grabbed the bat .   root = past verb
    n = rng.choice(PERSONS)
    v = rng.choice(CONTACT + EAT)
    o = rng.choice(FOODS if v in EAT else OBJECTS)
    return sent([
        ("The", "the", "DET", 2, "det"), (n, n, "NOUN", 3, "nsubj"), (past(v), v, "VERB", 0, "root"),
        ("the", "the", "DET", 5, "det"), (o, o, "NOUN", 3, "obj"), (".", ".", "PUNCT", 3, "punct"),
    ])


def t_plural_head(rng):
    # Bananas packed in a box .   root = capitalized plural noun
    n = rng.choice(FOODS + ANIMALS)
    o = rng.choice(["box", "truck", "plate"])
    return sent([
        (plural(n).capitalize(), n, "NOUN", 0, "root"), ("packed", "pack", "VERB", 1, "acl"),
        ("in", "in", "ADP", 5, "case"), (article(o), article(o), "DET", 5, "det"),
        (o, o, "NOUN", 2, "obl"), (".", ".", "PUNCT", 1, "punct"),
    ])


def t_lowercase(rng):
    # a dog eating a sandwich   (no final punctuation, lowercase start)
    n = rng.choice(ANIMALS + PERSONS)
    f = rng.choice(FOODS)
    return sent([
        ("a", "a", "DET", 2, "det"), (n, n, "NOUN", 0, "root"), ("eating", "eat", "VERB", 2, "acl"),
        (article(f), article(f), "DET", 5, "det"), (f, f, "NOUN", 3, "obj"),
    ])


def t_proper_noun(rng):
    # Obama holding an umbrella .   root = proper noun -> skipped
    name = rng.choice(NAMES)
    o = rng.choice(OBJECTS)
    return sent([
        (name, name, "PROPN", 0, "root"), ("holding", "hold", "VERB", 1, "acl"),
        (article(o), article(o), "DET", 4, "det"), (o, o, "NOUN", 2, "obj"),
        (".", ".", "PUNCT", 1, "punct"),
    ])


def t_unknown_head(rng):
    # A photo of a zebra on a bench .   root = noun missing from the lexicon -> skipped
    n = rng.choice(ANIMALS)
    o = rng.choice(OBJECTS)
    return sent([
        ("A", "a", "DET", 2, "det"), ("photo", "photo", "NOUN", 0, "root"), ("of", "of", "ADP", 5, "case"),
        (article(n), article(n), "DET", 5, "det"), (n, n, "NOUN", 2, "nmod"),
        ("on", "on", "ADP", 8, "case"), (article(o), article(o), "DET", 8, "det"),
        (o, o, "NOUN", 2, "nmod"), (".", ".", "PUNCT", 2, "punct"),
    ])


TEMPLATES = [
    (t_noun_holding, 5), (t_progressive, 4), (t_plural_present, 3), (t_third_person, 3),
    (t_past, 3), (t_plural_head, 2), (t_lowercase, 2), (t_proper_noun, 1), (t_unknown_head, 1),
]


def main():
    rng = random.Random(200)
    funcs = [f for f, w in TEMPLATES for _ in range(w)]
    annotations = []
    conllu = []
    caption_id = 1000
    for image in range(1, 41):
        for k in range(5):
            text, tokens = rng.choice(funcs)(rng)
            caption_id += 1
            annotations.append({"id": caption_id, "image_id": image, "caption": text})
            conllu.append(f"# sent_id = cap:{image}#{k}")
            conllu.append(f"# text = {text}")
            for i, (s, lemma, upos, head, rel) in enumerate(tokens, start=1):
                conllu.append(f"{i}\t{s}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_")
            conllu.append("")
    with open("captions.json", "w") as f:
        json.dump({"annotations": annotations}, f, indent=1)
        f.write("\n")
    with open("parses.conllu", "w") as f:
        f.write("\n".join(conllu) + "\n")
    with open("lexicon.json", "w") as f:
        json.dump(lexicon(), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
