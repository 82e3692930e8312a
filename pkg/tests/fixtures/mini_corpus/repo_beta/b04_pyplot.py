import matplotlib.pyplot as plt

plt.plot(xs, ys)
plt.savefig("out.png")
