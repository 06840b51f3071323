require('dotenv').config();
const name = process.env.DRIVER;
const driver = require(name);
const pg = await import('pg');
require('tagged');
