import tensorflow as tf

tf.compat.v2.boolean_mask(t, m)
