"""Regenerates vocab.txt and unigram.tsv from the wordfreq English lists.

    pip install wordfreq
    python3 data/build_vocab.py

The vocabulary is the 25,000 most frequent all-lowercase ASCII words, the
capitalized form of the 5,000 most frequent, and every word of the bundled
corpus (so the corpus passes the in-vocabulary precondition). Counts are
word frequencies scaled by 1e8; capitalized forms get a tenth of the
lowercase count.
"""
import glob
import os
import re

import wordfreq

HERE = os.path.dirname(os.path.abspath(__file__))

top = [w for w in wordfreq.top_n_list('en', 60000, wordlist='large') if re.fullmatch(r'[a-z]+', w)]
lower = top[:25000]
counts = {}
for w in lower:
    counts[w] = max(1, round(wordfreq.word_frequency(w, 'en', wordlist='large') * 1e8))
for w in lower[:5000]:
    c = w.capitalize()
    if c not in counts:
        counts[c] = max(1, counts[w] // 10)

corpus_words = set()
for f in glob.glob(os.path.join(HERE, 'corpus', '*.txt')):
    corpus_words.update(re.findall(r'[A-Za-z0-9]+', open(f).read()))
for w in sorted(corpus_words - counts.keys()):
    base = max(1, round(wordfreq.word_frequency(w.lower(), 'en', wordlist='large') * 1e8))
    counts[w] = base if w.islower() else max(1, base // 10)

words = sorted(counts)
with open(os.path.join(HERE, 'vocab.txt'), 'w') as f:
    f.write('\n'.join(words) + '\n')
with open(os.path.join(HERE, 'unigram.tsv'), 'w') as f:
    for w in words:
        f.write(f'{w}\t{counts[w]}\n')
