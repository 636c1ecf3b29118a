"""Regenerate porter_vocabulary.tsv from an independent Porter implementation.

Uses NLTK's PorterStemmer in MARTIN_EXTENSIONS mode, which tracks the
reference C implementation's published vocabulary/output pair.

    python3 gen_porter_oracle.py > porter_vocabulary.tsv
"""
import glob
import re
import sys

from nltk.stem.porter import PorterStemmer

CLASSIC = """caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing happy
sky relational conditional rational valenci hesitanci digitizer conformabli radicalli
differentli vileli analogousli vietnamization predication operator feudalism
decisiveness hopefulness callousness formaliti sensitiviti sensibiliti triplicate
formative formalize electriciti electrical hopeful goodness revival allowance inference
airliner gyroscopic adjustable defensible irritant replacement adjustment dependent
adoption homologou communism activate angulariti homologous effective bowdlerize
probate rate cease controll roll generalizations oscillators archaeology analogi
abli ies is as a by yes dying lying skies news probabl generous""".split()

words = set(CLASSIC)
for path in sorted(glob.glob("/usr/lib/python3*/**/*.py", recursive=True))[:1500]:
    try:
        text = open(path, encoding="utf-8").read()
    except (UnicodeDecodeError, OSError):
        continue
    for w in re.findall(r"\b[a-z]{1,18}\b", text):
        words.add(w)

stemmer = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
selected = sorted(words)
# Keep the sample bounded but spread across the alphabet.
if len(selected) > 6000:
    stride = len(selected) / 6000
    keep = {selected[int(i * stride)] for i in range(6000)}
    selected = sorted(keep | set(CLASSIC))
for w in selected:
    sys.stdout.write(f"{w}\t{stemmer.stem(w)}\n")
