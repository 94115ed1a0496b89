import java.io.BufferedReader;
import java.io.IOException;
import java.io.StringReader;
import java.util.ArrayList;
import java.util.List;

public class Outer {
    private static final int LIMIT;

    static {
        LIMIT = 10;
    }

    private final List<Runnable> tasks = new ArrayList<>();

    class Inner {
        int depth() {
            return tasks.size();
        }
    }

    public void schedule(final String name) {
        tasks.add(new Runnable() {
            private int runs;

            @Override
            public void run() {
                int local = runs + 1;
                runs = local;
                System.out.println(name + local);
            }
        });
    }

    public int process(String text) throws IOException {
        class Counter {
            int lines;
        }
        Counter counter = new Counter();
        int[][] grid = new int[LIMIT][LIMIT];
        try (BufferedReader reader = new BufferedReader(new StringReader(text))) {
            String line;
            outer:
            while ((line = reader.readLine()) != null) {
                for (int i = 0; i < line.length(); i++) {
                    char c = line.charAt(i);
                    if (c == '#') {
                        continue outer;
                    }
                    if (c == '!') {
                        break outer;
                    }
                    grid[counter.lines % LIMIT][i % LIMIT]++;
                }
                counter.lines++;
            }
        } catch (IllegalStateException | IndexOutOfBoundsException e) {
            return -1;
        } finally {
            tasks.clear();
        }
        int total = 0;
        for (int[] row : grid) {
            for (int cell : row) {
                total += cell;
            }
        }
        return total + counter.lines;
    }
}
