package io;

import java.io.FileInputStream;
import java.io.IOException;
import java.io.InputStream;

public class ResourceUser {
    private int bufferSize = 4096;

    public int firstByte(String path) throws IOException {
        InputStream in = new FileInputStream(path);
        return in.read();
    }

    public int safeFirstByte(String path) throws IOException {
        try (InputStream in = new FileInputStream(path)) {
            return in.read();
        }
    }
}
