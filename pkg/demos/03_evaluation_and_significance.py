"""BLI scoring, significance testing, and result aggregation.

Two aligners are compared on exactly the same test queries. Per-query
average precisions feed a paired t-test and an approximate-randomization
(shuffling) test; the Bonferroni correction guards against running many
language pairs at once.

Run:  python3 demos/03_evaluation_and_significance.py
"""

import numpy as np

from clembed.embeddings import WordVectorSpace
from clembed.evaluation import (bli_evaluate, bonferroni, paired_ttest,
                                rank_correlation, shuffling_test)
from clembed.lexicon import build_aligned_matrices, make_lexicon
from clembed.supervised import align_proc

rng = np.random.default_rng(11)
n, d = 400, 16
x = rng.standard_normal((n, d))
rot, _ = np.linalg.qr(rng.standard_normal((d, d)))
y = x @ rot + 0.5 * rng.standard_normal((n, d))

words = tuple(f"w{i:04d}" for i in range(n))
src = WordVectorSpace(words, x)
tgt = WordVectorSpace(words, y)
test = make_lexicon((w, w) for w in words[300:])

# System A: trained on 300 pairs.  System B: starved to 18 pairs, barely
# more than the 16 dimensions being estimated.
strong = align_proc(build_aligned_matrices(
    make_lexicon((w, w) for w in words[:300]), src, tgt))
weak = align_proc(build_aligned_matrices(
    make_lexicon((w, w) for w in words[:18]), src, tgt))

res_a = bli_evaluate(strong, src, tgt, test)
res_b = bli_evaluate(weak, src, tgt, test)
print(f"system A (300-pair dictionary): MAP = {res_a.map_score:.3f}")
print(f"system B (18-pair dictionary):  MAP = {res_b.map_score:.3f}")

aps_a = res_a.average_precisions()
aps_b = res_b.average_precisions()
p_t = paired_ttest(aps_a, aps_b)
p_s = shuffling_test(aps_a, aps_b, iterations=10000, seed=0)
alpha = bonferroni(0.05, 5)  # pretend we test 5 language pairs
print(f"paired t-test p = {p_t:.2e}, shuffling p = {p_s:.2e}")
print(f"Bonferroni-corrected alpha for 5 comparisons: {alpha}")
print("difference significant:", p_t < alpha and p_s < alpha)

# Correlating per-query APs shows whether both systems stumble on the
# same queries; here the weak map's errors come from estimation noise
# rather than intrinsic query difficulty, so expect a value near zero.
corr = rank_correlation(aps_a, aps_b, kind="spearman")
print(f"per-query AP Spearman correlation between systems: {corr:.3f}")
