package com.acme.api;

public class Router {
    private Handler handler;

    public String dispatch(String request) {
        // @sketchlink 0cafe0011-0000-4000-8000-000000000011
        String trimmed = request.trim();
        return handler.handle(trimmed);
    }

    @Deprecated
    /** @sketchlink 0cafe0012-0000-4000-8000-000000000012 */
    public void legacyRoute(String request) {
        handler.handle(request);
    }
}
