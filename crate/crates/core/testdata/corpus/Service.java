package services;

import java.util.ArrayList;
import java.util.List;

public class Service {
    private final List<String> names = new ArrayList<>();

    public Service() {
    }

    public void register(String name) {
        names.add(name);
    }

    public int count() {
        return names.size();
    }
}
