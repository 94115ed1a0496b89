package util;

import java.io.Serializable;
import java.util.Comparator;
import java.util.List;
import java.util.function.Function;
import java.util.function.IntFunction;
import java.util.function.Supplier;
import java.util.stream.Collectors;

public class Streams {
    static class Box {
        final String label;

        Box() {
            this("none");
        }

        Box(String label) {
            this.label = label;
        }
    }

    public List<Integer> lengths(List<String> words) {
        return words.stream().map(String::length).collect(Collectors.toList());
    }

    public String[] toArray(List<String> words) {
        IntFunction<String[]> make = String[]::new;
        return words.toArray(make.apply(0));
    }

    public Supplier<Box> boxes() {
        return Streams.Box::new;
    }

    public Function<String, String> trimmer() {
        return this::trim;
    }

    private String trim(String s) {
        return s.trim();
    }

    public Comparator<String> byLength() {
        return (Comparator<String> & Serializable) (a, b) -> Integer.compare(a.length(), b.length());
    }

    public long checksum(Object value) {
        Number n = (Number) value;
        long bits = (long) n.doubleValue();
        return bits ^ (bits >>> 32);
    }
}
