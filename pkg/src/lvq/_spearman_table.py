"""Two-tailed critical values of Spearman's rho. Generated by tools/spearman_critical.py."""

ALPHAS = (0.4, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)
EXACT_UP_TO = 18

# n -> critical |rho| per alpha (None: level unreachable at this n)
CRITICAL = {
    5: (0.600000, 0.700000, 0.800000, 0.900000, 1.000000, 1.000000, None, None),
    6: (0.485714, 0.542857, 0.657142, 0.828571, 0.885714, 0.942857, 1.000000, 1.000000),
    7: (0.392857, 0.500000, 0.571428, 0.714285, 0.785714, 0.892857, 0.928571, 0.964285),
    8: (0.357142, 0.428571, 0.523809, 0.642857, 0.738095, 0.833333, 0.880952, 0.904761),
    9: (0.333333, 0.400000, 0.483333, 0.600000, 0.700000, 0.783333, 0.833333, 0.866666),
    10: (0.309090, 0.369696, 0.454545, 0.563636, 0.648484, 0.745454, 0.793939, 0.830303),
    11: (0.290909, 0.345454, 0.427272, 0.536363, 0.618181, 0.709090, 0.754545, 0.800000),
    12: (0.272727, 0.328671, 0.405594, 0.503496, 0.587412, 0.678321, 0.727272, 0.769230),
    13: (0.258241, 0.313186, 0.384615, 0.483516, 0.560439, 0.648351, 0.703296, 0.747252),
    14: (0.243956, 0.301098, 0.367032, 0.463736, 0.538461, 0.626373, 0.679120, 0.723076),
    15: (0.235714, 0.289285, 0.353571, 0.446428, 0.521428, 0.603571, 0.653571, 0.700000),
    16: (0.226470, 0.276470, 0.341176, 0.429411, 0.502941, 0.582352, 0.635294, 0.679411),
    17: (0.218137, 0.267156, 0.328431, 0.414215, 0.487745, 0.566176, 0.617647, 0.659313),
    18: (0.211558, 0.259029, 0.316821, 0.401444, 0.471620, 0.550051, 0.599587, 0.642930),
    19: (0.205263, 0.250877, 0.308771, 0.391228, 0.459649, 0.535087, 0.584210, 0.628070),
    20: (0.198496, 0.243609, 0.299248, 0.380451, 0.446616, 0.521804, 0.569924, 0.612030),
    21: (0.193506, 0.237662, 0.292207, 0.370129, 0.436363, 0.509090, 0.557142, 0.598701),
    22: (0.189158, 0.230942, 0.284020, 0.360813, 0.425183, 0.497459, 0.543760, 0.585544),
    23: (0.183794, 0.225296, 0.277667, 0.352766, 0.416007, 0.486166, 0.532608, 0.573122),
    24: (0.180000, 0.220869, 0.271304, 0.344347, 0.406956, 0.475652, 0.521739, 0.561739),
    25: (0.175384, 0.215384, 0.265384, 0.336923, 0.397692, 0.466153, 0.510769, 0.550769),
    26: (0.171965, 0.210940, 0.259487, 0.330598, 0.390085, 0.457094, 0.500854, 0.540512),
    27: (0.168498, 0.206959, 0.254578, 0.324175, 0.382783, 0.448717, 0.492063, 0.530525),
    28: (0.165298, 0.202517, 0.249589, 0.318007, 0.375478, 0.440613, 0.483305, 0.521620),
    29: (0.162068, 0.199014, 0.244827, 0.311822, 0.368472, 0.432512, 0.474876, 0.512807),
    30: (0.159065, 0.195550, 0.240489, 0.306340, 0.362402, 0.425583, 0.466963, 0.504338),
}
