"""Walk through the score arithmetic on hand-made embeddings.

Run:  python3 demos/01_scoring_basics.py
"""

import numpy as np

from mace_eval import MaceConfig, Variant, cosine, mace_from_embeddings, mace_score

# Embeddings are plain vectors; cosine is the only geometry involved.
audio = np.array([1.0, 0.0, 0.0, 0.0])
candidate = np.array([0.8, 0.6, 0.0, 0.0])
references = [
    np.array([1.0, 0.2, 0.0, 0.0]),
    np.array([0.9, 0.1, 0.3, 0.0]),
]

print("audio-candidate cosine:", cosine(audio, candidate))
print("candidate-reference cosines:", [round(cosine(candidate, r), 4) for r in references])

# The full breakdown: audio-text and text-text components, averaged, then
# scaled by (1 - alpha) when the fluency-error probability beats the gate.
config = MaceConfig()  # alpha 0.3, threshold 0.97, weight 0.5, full variant
fluent = mace_from_embeddings(audio, candidate, references, fluency_prob=0.05, config=config)
print("\nfluent caption:", fluent.to_dict())

disfluent = mace_from_embeddings(audio, candidate, references, fluency_prob=0.99, config=config)
print("disfluent caption:", disfluent.to_dict())
print("penalty factor applied:", disfluent.final / fluent.final)

# Variants drop one component: AT is reference-free, TT is audio-free.
at = mace_from_embeddings(audio, candidate, None, 0.05, MaceConfig(variant=Variant.AT))
tt = mace_from_embeddings(None, candidate, references, 0.05, MaceConfig(variant=Variant.TT))
print("\nreference-free (AT) final:", at.final)
print("audio-free (TT) final:", tt.final)

# mace_score works straight from precomputed component similarities.
print("\nfrom components:", mace_score(0.8, 0.6, 0.99).to_dict())
