package com.acme.api;

public class Middleware {
    public String wrap(String s) {
        return "[" + s + "]";
    }
}
// Notes kept at the end of the file.
// @sketchlink 0cafe0013-0000-4000-8000-000000000013
