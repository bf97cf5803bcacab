#!/usr/bin/env python3
"""Regenerates the small bundled data sets under data/."""

import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

DOCUMENTS = [
    [
        "Praha je hlavní město České republiky.",
        "Město leží na řece Vltavě.",
        "Přes řeku vede mnoho mostů.",
        "Nejstarší z nich je Karlův most.",
        "Na mostě stojí třicet soch.",
        "Turisté chodí po mostě celý den.",
        "Večer se most osvětluje lampami.",
        "Z Hradčan je krásný výhled na město.",
        "Pražský hrad patří k největším hradům na světě.",
        "V katedrále jsou uloženy korunovační klenoty.",
    ],
    [
        "Babička peče každou neděli koláče.",
        "Do těsta dává mouku, mléko a vejce.",
        "Koláče plní tvarohem nebo povidly.",
        "Celý dům pak voní sladkým pečivem.",
        "Vnoučata přijíždějí na oběd autem.",
        "Po obědě sedí všichni na zahradě.",
        "Děda vypráví příběhy z mládí.",
        "Pes leží ve stínu pod jabloní.",
        "Kočka spí na teplé lavičce.",
        "Večer se všichni loučí a jedou domů.",
    ],
    [
        "Vlak odjíždí z hlavního nádraží v osm hodin.",
        "Cestující si kupují jízdenky u pokladny.",
        "Průvodčí kontroluje jízdenky ve vagonech.",
        "Za oknem ubíhají pole a lesy.",
        "Děti se dívají na krávy na pastvině.",
        "Ve vlaku je jídelní vůz s polévkou.",
        "Cesta do Brna trvá necelé tři hodiny.",
        "Brno je druhé největší město v zemi.",
        "Na náměstí se konají trhy.",
        "Studenti tam chodí na kávu.",
    ],
    [
        "Škola začíná prvního září.",
        "Žáci nesou nové aktovky a sešity.",
        "Učitelka píše na tabuli datum.",
        "V hodině češtiny čtou pohádku.",
        "O přestávce si děti hrají na dvoře.",
        "Matematika je pro některé žáky těžká.",
        "Ve čtvrtek mají tělocvik v hale.",
        "Po škole jdou domů psát úkoly.",
        "Rodiče kontrolují úkoly večer.",
        "V pátek se všichni těší na víkend.",
    ],
    [
        "Na horách napadl první sníh.",
        "Lyžaři vyrážejí na svahy brzy ráno.",
        "Lanovka je v sobotu plná lidí.",
        "Na chatě topí v kamnech dřevem.",
        "Horský čaj hřeje ruce i srdce.",
        "Děti stavějí sněhuláka před chatou.",
        "Večer hrají karty u stolu.",
        "V noci je nebe plné hvězd.",
        "Ráno svítí slunce na bílé kopce.",
        "Po týdnu se vracejí do města.",
    ],
]

# form, lemma, upos, feats
LEXICON = {
    "ADJ": [("velký", "velký", "Case=Nom|Degree=Pos|Gender=Masc|Number=Sing"),
            ("malý", "malý", "Case=Nom|Degree=Pos|Gender=Masc|Number=Sing"),
            ("starý", "starý", "Case=Nom|Degree=Pos|Gender=Masc|Number=Sing"),
            ("Černý", "černý", "Case=Nom|Degree=Pos|Gender=Masc|Number=Sing")],
    "NOUN": [("pes", "pes", "Animacy=Anim|Case=Nom|Gender=Masc|Number=Sing"),
             ("kocour", "kocour", "Animacy=Anim|Case=Nom|Gender=Masc|Number=Sing"),
             ("soused", "soused", "Animacy=Anim|Case=Nom|Gender=Masc|Number=Sing"),
             ("Petr", "Petr", "Animacy=Anim|Case=Nom|Gender=Masc|Number=Sing|NameType=Giv")],
    "VERB": [("spí", "spát", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin"),
             ("běží", "běžet", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin"),
             ("zpívá", "zpívat", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin"),
             ("čeká", "čekat", "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin")],
    "ADP": [("v", "v", "AdpType=Prep|Case=Loc"), ("na", "na", "AdpType=Prep|Case=Loc")],
    "LOC": [("domě", "dům", "Animacy=Inan|Case=Loc|Gender=Masc|Number=Sing"),
            ("zahradě", "zahrada", "Case=Loc|Gender=Fem|Number=Sing"),
            ("Praze", "Praha", "Case=Loc|Gender=Fem|NameType=Geo|Number=Sing")],
    "ADV": [("dnes", "dnes", "_"), ("rychle", "rychle", "Degree=Pos|Polarity=Pos"), ("tiše", "tiše", "Degree=Pos|Polarity=Pos")],
}

XPOS = {"ADJ": "AAMS1----1A----", "NOUN": "NNMS1-----A----", "VERB": "VB-S---3P-AA---", "ADP": "RR--6----------",
        "LOC": "NNIS6-----A----", "ADV": "Db-------------", "PUNCT": "Z:-------------"}


def treebank_sentence(rng, number):
    adj, noun, verb, adp, loc, adv = (rng.choice(LEXICON[k]) for k in ("ADJ", "NOUN", "VERB", "ADP", "LOC", "ADV"))
    # Velký pes spí v domě dnes .
    words = [
        (adj, "ADJ", 2, "amod"),
        (noun, "NOUN", 3, "nsubj"),
        (verb, "VERB", 0, "root"),
        (adp, "ADP", 5, "case"),
        (loc, "NOUN", 3, "obl"),
        (adv, "ADV", 3, "advmod"),
        ((".", ".", "_"), "PUNCT", 3, "punct"),
    ]
    if rng.random() < 0.4:
        words = words[1:]
        words = [(w, u, h - 1 if h > 1 else h, d) for (w, u, h, d) in words]
        words[0] = (words[0][0], words[0][1], 2, words[0][3])
    forms = [w[0][0] for w in words]
    text = " ".join(forms[:-1]) + forms[-1]
    lines = [f"# sent_id = {number}", f"# text = {text}"]
    for i, ((form, lemma, feats), upos, head, deprel) in enumerate(words, start=1):
        xpos = XPOS["LOC" if deprel == "obl" else upos]
        misc = "SpaceAfter=No" if i == len(words) - 1 else "_"
        lines.append("\t".join([str(i), form, lemma, upos, xpos, feats, str(head), deprel, "_", misc]))
    return "\n".join(lines) + "\n"


def write_treebank(rng):
    (DATA / "treebank").mkdir(parents=True, exist_ok=True)
    for name, count, start in (("train", 40, 1), ("dev", 10, 41)):
        doc = [f"# newdoc id = {name}"]
        body = "".join(treebank_sentence(rng, start + i) + "\n" for i in range(count))
        (DATA / "treebank" / f"{name}.conllu").write_text("\n".join(doc) + "\n" + body, encoding="utf-8")


SENTIMENT_WORDS = {
    "p": ["skvělý", "výborný", "báječný", "úžasný", "perfektní", "nádherný"],
    "n": ["hrozný", "otřesný", "příšerný", "mizerný", "katastrofální", "odporný"],
    "0": ["běžný", "obyčejný", "průměrný", "standardní", "normální", "všední"],
}


def write_sentiment(rng):
    lines = []
    for i in range(90):
        label = "pn0"[i % 3]
        words = [rng.choice(SENTIMENT_WORDS[label]) for _ in range(rng.randint(2, 4))]
        lines.append(f"{label}\t{' '.join(words)}")
    (DATA / "sentiment.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def mrp_graph(gid, text, nodes, edges, tops):
    out_nodes = []
    for nid, label, anchor, props in nodes:
        node = {"id": nid, "label": label}
        if props:
            node["properties"] = [k for k, _ in props]
            node["values"] = [v for _, v in props]
        if anchor:
            start = text.index(anchor)
            node["anchors"] = [{"from": len(text[:start]), "to": len(text[:start]) + len(anchor)}]
        out_nodes.append(node)
    out_edges = [{"source": s, "target": t, "label": label} for s, t, label in edges]
    return json.dumps({"id": gid, "input": text, "tops": tops, "nodes": out_nodes, "edges": out_edges},
                      ensure_ascii=False)


def write_mrp():
    gold = [
        mrp_graph("1", "Pes spí na zahradě.",
                  [(0, "spát", "spí", [("sempos", "v")]), (1, "pes", "Pes", [("sempos", "n.denot")]),
                   (2, "zahrada", "zahradě", [("sempos", "n.denot")])],
                  [(0, 1, "ACT"), (0, 2, "LOC")], [0]),
        mrp_graph("2", "Petr čeká v Praze.",
                  [(0, "čekat", "čeká", [("sempos", "v")]), (1, "Petr", "Petr", [("sempos", "n.denot")]),
                   (2, "Praha", "Praze", [("sempos", "n.denot")])],
                  [(0, 1, "ACT"), (0, 2, "LOC")], [0]),
    ]
    system = [
        mrp_graph("1", "Pes spí na zahradě.",
                  [(0, "spát", "spí", [("sempos", "v")]), (1, "pes", "Pes", [("sempos", "n.denot")]),
                   (2, "zahrada", "zahradě", [("sempos", "adj.denot")])],
                  [(0, 1, "ACT"), (0, 2, "DIR3")], [0]),
        mrp_graph("2", "Petr čeká v Praze.",
                  [(0, "čekat", "čeká", [("sempos", "v")]), (1, "Petr", "Petr", [("sempos", "n.denot")])],
                  [(0, 1, "ACT")], [0]),
    ]
    (DATA / "mrp").mkdir(parents=True, exist_ok=True)
    (DATA / "mrp" / "gold.mrp").write_text("\n".join(gold) + "\n", encoding="utf-8")
    (DATA / "mrp" / "system.mrp").write_text("\n".join(system) + "\n", encoding="utf-8")


def main():
    rng = random.Random(20200101)
    DATA.mkdir(exist_ok=True)
    (DATA / "corpus.txt").write_text("\n\n".join("\n".join(d) for d in DOCUMENTS) + "\n", encoding="utf-8")
    write_treebank(rng)
    write_sentiment(rng)
    write_mrp()


if __name__ == "__main__":
    main()
