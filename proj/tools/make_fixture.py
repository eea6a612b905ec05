#!/usr/bin/env python3
"""Generate the synthetic two-community fixture corpus.

Documents come in twin pairs: the community-A and community-B document of a
pair share the same background text, so every background n-gram has identical
document counts in both communities. Divergent terms are planted on top of
that balanced base:

  illegal aliens   frequency, A 120 docs / B 20 docs
  climate crisis   frequency, A 25 docs / B 130 docs
  police           sentiment, 100 docs each; A docs open with a positive word,
                   B docs with a negative one. A second block of 100 pairs
                   reuses the same background with the polarity flipped so
                   the sentiment words themselves stay balanced.

Other planted items: "borderline" (A 16 / B 15), "filibuster" (A 3 / B 0),
"economy" (200 docs each) and "relief" (60 docs each, split between a tax
topic and a weather topic).

Usage: make_fixture.py OUT.jsonl
"""
import json
import random
import sys

PAIRS = 2000
LABELS = ("community_r", "community_d")

FILLER = """the a to of and in is for on this that we they it our their with
about from at by what when will just more people time today week year day
country state city town local plan bill law policy issue news story report
question answer debate meeting office room team group member worker family
school student teacher parent child water road bridge train bus car street
house market store price cost money budget number rate data poll survey
campaign county district board council committee hearing session morning
evening night weekend monday friday spring summer winter fall season program
service system process project process rule order form letter email phone call
video photo post thread comment page book paper article chapter line list
table chart map route plant farm field river lake park garden tree window door
floor wall roof kitchen coffee lunch dinner game match score player coach fan
stadium ticket seat note stage speech vote ballot voter election senate
congress governor mayor judge court case jury lawyer witness record file
document statement memo agency department office staff director manager""".split()

SENTIMENT_FILLER = ["happy", "nice", "sad", "wrong", "hope", "worry"]

BACKGROUND_TERMS = """healthcare jobs taxes border energy vaccine inflation
schools housing wages veterans medicare pipeline tariffs manufacturing
infrastructure broadband farmers rural suburbs highway transit nuclear
solar coal drilling fracking lumber steel unions pensions mortgage
tuition childcare groceries gasoline diesel shipping ports trucking
railroads aviation fisheries wildfire drought hurricane census
redistricting turnout primaries""".split()
assert len(BACKGROUND_TERMS) == 50, len(BACKGROUND_TERMS)

HANDLES = ["@newsdesk", "@cityhall", "@localreporter", "@statecapitol", "@POTUS"]
PARTY_MENTIONS = ["Republicans", "Democrats", "republican", "Democratic"]


def background(rng):
    words = [rng.choice(FILLER) for _ in range(rng.randint(6, 14))]
    if rng.random() < 0.15:
        words.insert(rng.randrange(len(words) + 1), rng.choice(SENTIMENT_FILLER))
    if rng.random() < 0.05:
        words.insert(rng.randrange(len(words) + 1), "not")
    for term in rng.sample(BACKGROUND_TERMS, rng.choice([0, 1, 1, 2])):
        words.insert(rng.randrange(len(words) + 1), term)
    if rng.random() < 0.08:
        words.insert(rng.randrange(len(words) + 1), rng.choice(PARTY_MENTIONS))
    if rng.random() < 0.3:
        i = rng.randrange(len(words))
        words[i] = "#" + words[i].capitalize()
    words[0] = words[0].capitalize()
    if rng.random() < 0.2:
        words.insert(0, rng.choice(HANDLES))
    if rng.random() < 0.5:
        words[-1] += rng.choice([".", "!", "?", ",", "..."])
    if rng.random() < 0.15:
        words.append("https://t.co/" + "".join(rng.choice("abcdefghijkmnpqrstuvwxyz0123456789") for _ in range(8)))
    return words


def main(out_path):
    rng = random.Random(20240612)
    order = list(range(PAIRS))
    rng.shuffle(order)
    police = order[0:100]
    mirrored = order[100:200]
    relief = order[200:260]
    plain = order[260:]

    texts = {i: background(rng) for i in range(PAIRS)}
    pair_a = {i: list(texts[i]) for i in range(PAIRS)}
    pair_b = {i: list(texts[i]) for i in range(PAIRS)}

    for src, dst in zip(police, mirrored):
        base = texts[src]
        pair_a[src] = ["Great,"] + base + ["police"]
        pair_b[src] = ["Terrible,"] + base + ["police"]
        pair_a[dst] = ["Terrible,"] + list(base)
        pair_b[dst] = ["Great,"] + list(base)

    # Surface variants of each topic differ only in case, punctuation,
    # function words and a trailing handle or link, so every document reads
    # differently while carrying the same content words in the same order.
    tax_variants = [
        "Tax relief: the IRS refund season opens with income deduction credit filing rules",
        "tax relief - an irs refund season opens, with income deduction and credit filing rules!",
        "TAX RELIEF for you: IRS refund season opens with the income deduction, credit filing rules",
        "Tax relief... so the IRS refund season opens with income deduction + credit filing rules",
    ]
    weather_variants = [
        "Storm relief: the flood forecast brings hurricane rain wind damage evacuation orders",
        "storm relief - a flood forecast brings hurricane rain, wind damage and evacuation orders!",
        "STORM RELIEF for us: flood forecast brings the hurricane rain, wind damage, evacuation orders",
        "Storm relief... so the flood forecast brings hurricane rain + wind damage evacuation orders",
    ]
    for k, i in enumerate(relief):
        variants = tax_variants if k % 2 == 0 else weather_variants
        text = rng.choice(variants)
        if rng.random() < 0.5:
            text += " " + rng.choice(HANDLES)
        else:
            text += " https://t.co/" + "".join(rng.choice("abcdefghjkmnpqrstuvwxyz23456789")
                                               for _ in range(8))
        pair_a[i] = text.split()
        pair_b[i] = text.split()

    economy = rng.sample(plain, 200)
    for i in economy:
        for side in (pair_a, pair_b):
            words = side[i]
            words.insert(rng.randrange(1, len(words) + 1), "economy")

    shuffled = list(plain)
    rng.shuffle(shuffled)
    cursor = 0

    def take(n):
        nonlocal cursor
        chosen = shuffled[cursor:cursor + n]
        cursor += n
        return chosen

    phrases = {"illegal aliens": ["illegal aliens", "Illegal aliens!", "ILLEGAL ALIENS"],
               "climate crisis": ["climate crisis", "Climate Crisis.", "#climate crisis"],
               "borderline": ["borderline"], "filibuster": ["filibuster"]}
    counts = {"illegal aliens": (120, 20), "climate crisis": (25, 130),
              "borderline": (16, 15), "filibuster": (3, 0)}
    for term, (na, nb) in counts.items():
        a_docs = take(na)
        b_docs = take(nb)
        for side, docs in ((pair_a, a_docs), (pair_b, b_docs)):
            for i in docs:
                side[i] = side[i] + rng.choice(phrases[term]).split()

    with open(out_path, "w", encoding="utf-8") as f:
        for i in range(PAIRS):
            for label, side, prefix in ((LABELS[0], pair_a, "r"), (LABELS[1], pair_b, "d")):
                rec = {"id": f"{prefix}{i:05d}", "text": " ".join(side[i]), "community": label}
                f.write(json.dumps(rec, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
