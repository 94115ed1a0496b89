public enum Color {
    RED(255, 0, 0),
    GREEN(0, 255, 0),
    BLUE(0, 0, 255) {
        @Override
        public boolean cool() {
            return true;
        }
    };

    private final int r;
    private final int g;
    private final int b;

    Color(int r, int g, int b) {
        this.r = r;
        this.g = g;
        this.b = b;
    }

    public boolean cool() {
        return false;
    }

    public int rgb() {
        return (r << 16) | (g << 8) | b;
    }

    public static Color parse(String name) {
        switch (name) {
            case "red":
                return RED;
            case "green":
                return GREEN;
            default:
                return BLUE;
        }
    }
}
