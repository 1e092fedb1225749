import numpy as np


NOISE = -1


def neighbourhood_bounds(points, eps):
    """Get, for every point of a sorted list, the first and last indices of the points within `eps` of it (inclusive).
    Both bounds are non-decreasing in the point index, so they are found with a single sweep each.

    :param numpy.ndarray points: sorted ascending
    :param float eps:
    :return tuple(numpy.ndarray, numpy.ndarray):
    """
    n = len(points)
    lower = np.zeros(n, dtype=np.int64)
    upper = np.zeros(n, dtype=np.int64)
    left = right = 0

    for index in range(n):
        while points[index] - points[left] > eps:
            left += 1
        right = max(right, index)
        while right + 1 < n and points[right + 1] - points[index] <= eps:
            right += 1
        lower[index] = left
        upper[index] = right

    return lower, upper


def dbscan_1d(points, eps, min_pts):
    """Run DBSCAN over sorted scalar points using the neighbourhood `|t_i - t_j| <= eps` (a point is its own
    neighbour). Clusters are numbered in order of their first core point; border points reachable from two clusters
    belong to the earlier one. Sortedness makes every cluster a contiguous run, so labelling is a single forward scan.

    :param list(float)|numpy.ndarray points: sorted ascending
    :param float eps: neighbourhood radius (>= 0)
    :param int min_pts: minimum neighbourhood size (including the point itself) of a core point
    :return list(int): the cluster label of each point, or -1 for noise
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)

    if n == 0:
        return []

    lower, upper = neighbourhood_bounds(points, eps)
    is_core = (upper - lower + 1) >= min_pts
    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    index = 0

    while index < n:
        if labels[index] != NOISE or not is_core[index]:
            index += 1
            continue

        # Claim unlabelled points to the left of the cluster's first core point.
        for neighbour in range(lower[index], index):
            if labels[neighbour] == NOISE:
                labels[neighbour] = cluster

        frontier = upper[index]
        position = index

        while position <= frontier:
            if labels[position] == NOISE:
                labels[position] = cluster
            if is_core[position] and labels[position] == cluster:
                frontier = max(frontier, upper[position])
            position += 1

        cluster += 1
        index = position

    return labels.tolist()
