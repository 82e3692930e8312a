import numpy as np

np.linalg.multi_dot(mats)
np.zeros(3)
