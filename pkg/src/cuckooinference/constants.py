# splitmix64 increment (2^64 / golden ratio) and finalizer multipliers
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULTIPLIER_1 = 0xBF58476D1CE4E5B9
MIX_MULTIPLIER_2 = 0x94D049BB133111EB

MASK64 = (1 << 64) - 1

# largest n the 2^n enumerator accepts by default
BRUTE_FORCE_CAP = 20

# hard ceiling regardless of the configured cap, 2^30 assignments
BRUTE_FORCE_HARD_CAP = 30

SIDES = (0, 1)

CAPACITY_RULES = ("classic", "dsq")

CONFIDENCE = 0.95
