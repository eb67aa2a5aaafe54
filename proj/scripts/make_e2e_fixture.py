#!/usr/bin/env python3
"""Writes the scripted end-to-end fixture under tests/fixtures/e2e.

Each question lists its claims and the canned verification replies for the
predicted answer and, for incorrect answers, for the gold answer. The
expected aggregate values are derived here from the same table with exact
fractions, independently of the C++ code.
"""

import json
import pathlib
from fractions import Fraction

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "e2e"

# (id, question, gold, predicted assignment, label, error category,
#  [(claim, reply for predicted answer, reply for gold answer or None)])
QUESTIONS = [
    ("q01", "Which author wrote the novel Ubik?", "Philip K. Dick",
     {"answer": "Philip K. Dick", "city": "Chicago"}, True, None, [
         ("<answer> is an author", "True", None),
         ("<answer> wrote the novel Ubik", "True", None),
         ("<answer> was born in <city>", "True.", None),
         ("<city> is a city in the United States", "True", None),
     ]),
    ("q02", "Who painted The Persistence of Memory?", "Salvador Dali",
     {"answer": "Salvador Dali", "country": "Spain"}, True, None, [
         ("<answer> is a painter", "True", None),
         ("<answer> painted The Persistence of Memory", "True", None),
         ("<answer> was a member of the surrealist movement", "TRUE", None),
         ("<answer> was born in <country>", "False.", None),
     ]),
    ("q03", "What is the capital city of Australia?", "Canberra",
     {"answer": "Canberra"}, True, None, [
         ("<answer> is a city", "True", None),
         ("<answer> is the capital of Australia", "True", None),
         ("<answer> is located in the Australian Capital Territory", "I am not certain about that.", None),
         ("<answer> has a larger population than Sydney", "False", None),
         ("<answer> was selected as the capital in 1908", "True", None),
     ]),
    ("q04", "Which element has the chemical symbol Fe?", "Iron",
     {"answer": "Iron"}, True, None, [
         ("<answer> is a chemical element", "True", None),
         ("<answer> has the chemical symbol Fe", "False. Iron has the chemical symbol Fe.", None),
     ]),
    ("q05", "Who composed the opera The Magic Flute?", "Wolfgang Amadeus Mozart",
     {"answer": "Wolfgang Amadeus Mozart", "city": "Salzburg"}, True, None, [
         ("<answer> is a composer", "True", None),
         ("<answer> composed The Magic Flute", "True", None),
         ("<answer> was born in <city>", "True", None),
         ("<city> is in Austria", "True", None),
         ("<answer> died in 1791", "Not enough information.", None),
     ]),
    ("q06", "Which novelist wrote The Sea, the Sea?", "Iris Murdoch",
     {"answer": "John Banville"}, False, "reasoning", [
         ("<answer> is a novelist", "True", "True"),
         ("<answer> wrote The Sea, the Sea", "False", "True"),
         ("<answer> won the Booker Prize for The Sea, the Sea", "False.", "True."),
         ("<answer> was born in Dublin", "True", "True"),
     ]),
    ("q07", "What is the longest river in South America?", "Amazon River",
     {"answer": "Parana River", "ocean": "Atlantic Ocean"}, False, None, [
         ("<answer> is a river", "True", "True"),
         ("<answer> is the longest river in South America", "False", "True"),
         ("<answer> flows into the <ocean>", "True", "False."),
     ]),
    ("q08", "Who was the first person to reach the South Pole?", "Roald Amundsen",
     {"answer": "Robert Falcon Scott"}, False, "false assumption", [
         ("<answer> is an explorer", "True", "True"),
         ("<answer> was the first person to reach the South Pole",
          "False. Roald Amundsen was the first to reach it.", "True"),
         ("<answer> reached the South Pole in 1911",
          "As an AI language model, I cannot verify this.", "True"),
     ]),
    ("q09", "Which scientist proposed the theory of general relativity?", "Albert Einstein",
     {"answer": "Isaac Newton", "country": "England", "institution": "Cambridge"}, False, "tense", [
         ("<answer> is a scientist", "True", "True"),
         ("<answer> proposed the theory of general relativity", "True", "True"),
         ("<answer> was born in <country>", "True", "False"),
         ("<answer> worked at <institution>", "False", "False"),
     ]),
    ("q10", "In which country is Machu Picchu located?", "Peru",
     {"answer": "Peru", "country": "Brazil"}, None, None, [
         ("<answer> is a country", "True", None),
         ("Machu Picchu is located in <answer>", "True", None),
         ("<answer> borders <country>", "False", None),
     ]),
    ("q11", "What color do you get by mixing blue and yellow?", "Green",
     {"answer": "Green"}, True, None, [
         ("<answer> is a color", "True", None),
     ]),
]

# Decomposition fails for this one: the reply never reaches step 3.
FAILED = ("q12", "Which ship sank on its maiden voyage in 1912?", "RMS Titanic", True)

PACK_EXAMPLES = [
    ("Who wrote the play Macbeth?", "The word 'who' describes an 'author'.",
     ["<answer> is an author", "<answer> wrote a play named Macbeth"],
     "None.",
     ["<answer> is an author", "<answer> wrote a play named Macbeth"]),
    ("What is the largest ocean on Earth?", "The word 'what' describes an 'ocean'.",
     ["<answer> is an ocean", "<answer> is the largest ocean on Earth"],
     "None.",
     ["<answer> is an ocean", "<answer> is the largest ocean on Earth"]),
    ("Which city hosted the 1992 Summer Olympics?", "The word 'which' describes a 'city'.",
     ["<answer> is a city", "<answer> hosted the 1992 Summer Olympics", "<answer> is in a country"],
     "The country is shared; tag it <country>.",
     ["<answer> is a city", "<answer> hosted the 1992 Summer Olympics", "<answer> is in <country>",
      "<country> is in Europe"]),
    ("Who discovered penicillin?", "The word 'who' describes a 'scientist'.",
     ["<answer> is a scientist", "<answer> discovered penicillin"],
     "None.",
     ["<answer> is a scientist", "<answer> discovered penicillin"]),
    ("Which mountain is the tallest in Africa?", "The word 'which' describes a 'mountain'.",
     ["<answer> is a mountain", "<answer> is the tallest mountain in Africa", "<answer> is in a country"],
     "The country is shared; tag it <country>.",
     ["<answer> is a mountain", "<answer> is the tallest mountain in Africa", "<answer> is in <country>",
      "<country> is in Africa"]),
]


def instantiate(claim, assignment):
    out = claim
    for tag, value in assignment.items():
        out = out.replace(f"<{tag}>", value)
    return out


def numbered(lines):
    return "\n".join(f"{i}. {c}" for i, c in enumerate(lines, 1))


def decomposition_reply(claims):
    return (" The question asks for a single entity.\n" + numbered(claims[:1]) +
            "\nStep 2: Shared entities get their own tags.\nStep 3:\n" + numbered(claims) + "\n")


def answer_reply(assignment):
    return "\n".join(f"<{t}>: {v}" for t, v in assignment.items())


def score(replies):
    # Keyword rules with restatement, enough for the canned replies above.
    def verdict(reply, claim):
        r = reply.lower().rstrip(".")
        if "false" in r and claim.lower() in r:
            return True
        if "true" in r:
            return True
        return False
    vs = [verdict(r, c) for r, c in replies]
    if len(vs) <= 1:
        return None
    return Fraction(sum(vs[1:]), len(vs) - 1)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rules = []
    questions = []
    labels = []
    pred_scores = {}
    gt_scores = {}

    for qid, text, gold, assignment, label, category, claims in QUESTIONS:
        questions.append({"id": qid, "text": text, "gold_answer": gold, "dataset": "custom"})
        rules.append({"match": "substring", "pattern": f"Question: {text}\nStep 1:",
                      "response": decomposition_reply([c for c, _, _ in claims])})
        rules.append({"match": "substring", "pattern": f"Question: {text}\n\n<answer>:",
                      "response": answer_reply(assignment)})
        pred, gt = [], []
        gold_assignment = dict(assignment, answer=gold)
        for claim, pred_reply, gold_reply in claims:
            p_text = instantiate(claim, assignment)
            rules.append({"match": "exact", "pattern": "True or False: " + p_text, "response": pred_reply})
            pred.append((pred_reply, p_text))
            g_text = instantiate(claim, gold_assignment)
            if g_text != p_text:
                rules.append({"match": "exact", "pattern": "True or False: " + g_text, "response": gold_reply})
                gt.append((gold_reply, g_text))
            else:
                gt.append((pred_reply, p_text))
        pred_scores[qid] = score(pred)
        gt_scores[qid] = score(gt)
        if label is not None:
            row = {"question_id": qid, "correct": label}
            if category:
                row["error_category"] = category
            labels.append(row)

    qid, text, gold, label = FAILED
    questions.append({"id": qid, "text": text, "gold_answer": gold, "dataset": "custom"})
    rules.append({"match": "substring", "pattern": f"Question: {text}\nStep 1:",
                  "response": " The question asks for a ship.\n1. <answer> is a ship\nStep 2: None.\n"})
    labels.append({"question_id": qid, "correct": label})

    label_of = {row["question_id"]: row["correct"] for row in labels}
    correct = [pred_scores[q] for q in pred_scores if label_of.get(q) is True and pred_scores[q] is not None]
    incorrect = [pred_scores[q] for q in pred_scores if label_of.get(q) is False and pred_scores[q] is not None]
    n_correct = sum(1 for q in pred_scores if label_of.get(q) is True)
    n_incorrect = sum(1 for q in pred_scores if label_of.get(q) is False)
    gt = [0, 0, 0]
    for q in pred_scores:
        if label_of.get(q) is False and pred_scores[q] is not None and gt_scores[q] is not None:
            gt[0 if gt_scores[q] > pred_scores[q] else 1 if gt_scores[q] == pred_scores[q] else 2] += 1

    def frac(f):
        return [f.numerator, f.denominator]

    mean_c = sum(correct, Fraction(0)) / len(correct)
    mean_i = sum(incorrect, Fraction(0)) / len(incorrect)
    expected = {
        "n_total": len(questions),
        "n_failed": 1,
        "n_unlabeled": sum(1 for q in pred_scores if q not in label_of),
        "n_correct": n_correct,
        "n_incorrect": n_incorrect,
        "mean_correct": frac(mean_c),
        "mean_incorrect": frac(mean_i),
        "diff": frac(mean_c - mean_i),
        "p_correct": frac(Fraction(n_correct, n_correct + n_incorrect)),
        "p_incorrect": frac(Fraction(n_incorrect, n_correct + n_incorrect)),
        "gt_comparison": gt,
        "correct_scores": [float(x) for x in correct],
        "incorrect_scores": [float(x) for x in incorrect],
        "score_true": {q: (frac(s) if s is not None else None) for q, s in pred_scores.items()},
        "gt_score_true": {q: (frac(s) if s is not None else None) for q, s in gt_scores.items()},
    }

    def jsonl(rows):
        return "".join(json.dumps(r) + "\n" for r in rows)

    (OUT / "questions.jsonl").write_text(jsonl(questions))
    (OUT / "labels.jsonl").write_text(jsonl(labels))
    (OUT / "script.json").write_text(json.dumps(rules, indent=1) + "\n")
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1) + "\n")

    pack = OUT / "pack"
    pack.mkdir(exist_ok=True)
    (pack / "instructions.txt").write_text(
        "Decompose the question into claims that must hold for its answer. Step 1: list independent claims "
        "about the answer, starting with its entity type. Step 2: note entities shared between claims. "
        "Step 3: rewrite the claims with a tag for each shared entity. Write <answer> for the answer.\n")
    blocks = []
    for q, rationale, step1, step2, step3 in PACK_EXAMPLES:
        blocks.append(f"Question: {q}\nStep 1: {rationale}\n{numbered(step1)}\nStep 2: {step2}\n"
                      f"Step 3:\n{numbered(step3)}\n")
    (pack / "examples.txt").write_text("---\n".join(blocks))


if __name__ == "__main__":
    main()
