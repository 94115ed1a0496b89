package geometry;

import javax.annotation.concurrent.Immutable;

@Immutable
public final class ImmutablePoint implements Comparable<ImmutablePoint> {
    private final int x;
    private final int y;
    private volatile int hash;

    public ImmutablePoint(int x, int y) {
        this.x = x;
        this.y = y;
    }

    public int x() {
        return x;
    }

    public int y() {
        return y;
    }

    @Override
    public int compareTo(ImmutablePoint other) {
        return x != other.x ? Integer.compare(x, other.x) : Integer.compare(y, other.y);
    }

    @Override
    public boolean equals(Object o) {
        if (!(o instanceof ImmutablePoint)) {
            return false;
        }
        ImmutablePoint p = (ImmutablePoint) o;
        return p.x == x && p.y == y;
    }

    @Override
    public int hashCode() {
        int h = hash;
        if (h == 0) {
            h = 31 * x + y;
            hash = h;
        }
        return h;
    }
}
