import javax.annotation.Nullable;

public class Nullables {
    @Nullable
    private Integer cached;

    private long total;

    @Nullable
    public int lookup(String key) {
        return key == null ? -1 : key.length();
    }

    public void add(long delta, String label) {
        total += delta;
        if (label != null && cached == null) {
            cached = (int) total;
        }
    }

    public long total() {
        return total;
    }
}
