package data;

import java.io.IOException;
import java.util.ArrayList;
import java.util.HashMap;
import java.util.List;
import java.util.Map;

public class Repository<K extends Comparable<K>, V> {
    private final Map<K, List<V>> store = new HashMap<>();

    @SafeVarargs
    public final void putAll(K key, V... values) {
        List<V> bucket = store.computeIfAbsent(key, k -> new ArrayList<>());
        for (V v : values) {
            bucket.add(v);
        }
    }

    public List<? extends V> get(K key) {
        return store.getOrDefault(key, new ArrayList<>());
    }

    public static <T extends Comparable<? super T>> T max(List<T> items) throws IOException {
        if (items.isEmpty()) {
            throw new IOException("empty");
        }
        T best = items.get(0);
        for (T t : items) {
            if (t.compareTo(best) > 0) {
                best = t;
            }
        }
        return best;
    }

    public int size() {
        int n = 0;
        for (Map.Entry<K, List<V>> e : store.entrySet()) {
            n += e.getValue().size();
        }
        return n;
    }

    public Object[] snapshot() {
        java.util.List<Object> out = new java.util.ArrayList<>();
        out.addAll(store.keySet());
        return out.toArray(new Object[0]);
    }
}
